//! Streaming Welch estimate with Hann windows.
//!
//! The estimate is two-sided and normalised so that a stationary series with
//! autocorrelation `R(tau)` yields `int R(tau) exp(i omega tau) dtau`.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub struct Welch {
    segment: usize,
    hop: usize,
    dt: f64,
    window: Vec<f64>,
    norm: f64,
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<f64>,
    scratch: Vec<C64>,
    fft_scratch: Vec<C64>,
    acc: Vec<f64>,
    segments: usize,
    seen: usize,
}

impl std::fmt::Debug for Welch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Welch")
            .field("segment", &self.segment)
            .field("hop", &self.hop)
            .field("segments", &self.segments)
            .finish()
    }
}

pub fn hann(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.5 * (1.0 - (TAU * i as f64 / n as f64).cos())).collect()
}

impl Welch {
    /// `segment` samples per window, `overlap` in `[0, 1)`.
    pub fn new(segment: usize, overlap: f64, dt: f64) -> Result<Self> {
        if segment < 16 {
            return Err(Error::invalid("welch.segment", "need at least 16 samples per segment"));
        }
        if !(0.0..1.0).contains(&overlap) {
            return Err(Error::invalid("welch.overlap", "must lie in [0, 1)"));
        }
        if !(dt > 0.0) {
            return Err(Error::invalid("welch.dt", "must be positive"));
        }
        let hop = ((segment as f64) * (1.0 - overlap)).round().max(1.0) as usize;
        let window = hann(segment);
        let norm = dt / window.iter().map(|w| w * w).sum::<f64>();
        let fft = FftPlanner::new().plan_fft_forward(segment);
        let fft_scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        Ok(Self {
            segment,
            hop,
            dt,
            window,
            norm,
            fft,
            buf: Vec::with_capacity(segment),
            scratch: vec![C64::new(0.0, 0.0); segment],
            fft_scratch,
            acc: vec![0.0; segment / 2 + 1],
            segments: 0,
            seen: 0,
        })
    }

    pub fn push(&mut self, x: f64) {
        self.buf.push(x);
        self.seen += 1;
        if self.buf.len() == self.segment {
            self.flush_segment();
            self.buf.drain(..self.hop);
        }
    }

    pub fn extend(&mut self, xs: &[f64]) {
        for &x in xs {
            self.push(x);
        }
    }

    fn flush_segment(&mut self) {
        for (s, (x, w)) in self.scratch.iter_mut().zip(self.buf.iter().zip(&self.window)) {
            *s = C64::new(x * w, 0.0);
        }
        self.fft.process_with_scratch(&mut self.scratch, &mut self.fft_scratch);
        for (a, z) in self.acc.iter_mut().zip(&self.scratch) {
            *a += z.norm_sqr();
        }
        self.segments += 1;
    }

    pub fn segments(&self) -> usize {
        self.segments
    }

    /// Angular frequencies of the non-negative bins.
    pub fn omega(&self) -> Vec<f64> {
        let df = TAU / (self.segment as f64 * self.dt);
        (0..self.acc.len()).map(|k| k as f64 * df).collect()
    }

    pub fn bin_width(&self) -> f64 {
        TAU / (self.segment as f64 * self.dt)
    }

    pub fn segment_duration(&self) -> f64 {
        self.segment as f64 * self.dt
    }

    /// Averaged periodogram; errors if no full segment was seen.
    pub fn finish(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        if self.segments == 0 {
            return Err(Error::TooShortSeries {
                len: self.seen,
                segment: self.segment,
            });
        }
        let scale = self.norm / self.segments as f64;
        Ok((self.omega(), self.acc.iter().map(|a| a * scale).collect()))
    }
}

/// One-shot Welch estimate of a stored series.
pub fn welch(series: &[f64], dt: f64, segment: usize, overlap: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if series.len() < segment {
        return Err(Error::TooShortSeries {
            len: series.len(),
            segment,
        });
    }
    let mut w = Welch::new(segment, overlap, dt)?;
    w.extend(series);
    w.finish()
}

/// Spectral kernel of a length-`t` continuous Hann window, normalised to unit
/// integral over `nu` in Hz: the expected Welch value is `S` convolved with it.
pub fn hann_kernel(nu: f64, t: f64) -> f64 {
    let x = nu * t;
    let sinc = |u: f64| if u.abs() < 1e-12 { 1.0 } else { (PI * u).sin() / (PI * u) };
    let w = 0.5 * t * (sinc(x) + 0.5 * sinc(x - 1.0) + 0.5 * sinc(x + 1.0));
    w * w / (3.0 * t / 8.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn white_noise_level() {
        let dt = 1e-3;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: Vec<f64> = (0..400_000).map(|_| { let z: f64 = StandardNormal.sample(&mut rng); 2.0 * z }).collect();
        let (_, p) = welch(&x, dt, 1024, 0.5).unwrap();
        let mean = p[1..p.len() - 1].iter().sum::<f64>() / (p.len() - 2) as f64;
        assert!((mean / (4.0 * dt) - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn tone_area() {
        let dt = 1e-4;
        let amp = 1.7;
        let f0 = 312.5;
        let x: Vec<f64> = (0..200_000).map(|i| amp * (TAU * f0 * i as f64 * dt).cos()).collect();
        let (om, p) = welch(&x, dt, 4096, 0.5).unwrap();
        let dw = om[1] - om[0];
        // positive-frequency area, doubled for the mirror peak at -f0
        let area = 2.0 * p.iter().sum::<f64>() * dw / TAU;
        assert!((area / (amp * amp / 2.0) - 1.0).abs() < 0.01, "{area}");
    }

    #[test]
    fn kernel_has_unit_area() {
        let t = 2.0;
        let step = 1e-3;
        let area: f64 = (-20_000..=20_000).map(|i| hann_kernel(i as f64 * step, t) * step).sum();
        assert!((area - 1.0).abs() < 1e-4, "{area}");
    }

    #[test]
    fn short_series_is_rejected() {
        assert!(matches!(welch(&[0.0; 100], 1.0, 128, 0.5), Err(Error::TooShortSeries { .. })));
    }
}
