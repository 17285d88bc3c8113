//! Lock-in demodulation behind a fourth-order band-pass filter.
//!
//! Frequencies in this module are in Hz, since they describe sampled signals.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Full -3 dB bandwidth of the band-pass, Hz.
pub const DEFAULT_BANDWIDTH: f64 = 19.0;
pub const DEFAULT_ORDER: usize = 4;

/// Second-order section, direct form I.
#[derive(Debug, Clone, Copy)]
struct Biquad {
    b: [f64; 3],
    a: [f64; 2],
}

impl Biquad {
    /// Unity-peak-gain resonator with full bandwidth `bw` around `f0`.
    fn bandpass(f0: f64, bw: f64, fs: f64) -> Self {
        let w0 = TAU * f0 / fs;
        let q = f0 / bw;
        let alpha = w0.sin() / (2.0 * q);
        let a0 = 1.0 + alpha;
        Self {
            b: [alpha / a0, 0.0, -alpha / a0],
            a: [-2.0 * w0.cos() / a0, (1.0 - alpha) / a0],
        }
    }

    fn response(&self, f: f64, fs: f64) -> C64 {
        let z1 = C64::from_polar(1.0, -TAU * f / fs);
        let z2 = z1 * z1;
        (self.b[0] + self.b[1] * z1 + self.b[2] * z2) / (1.0 + self.a[0] * z1 + self.a[1] * z2)
    }

    fn filter(&self, x: &mut [f64]) {
        let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
        for v in x.iter_mut() {
            let y = self.b[0] * *v + self.b[1] * x1 + self.b[2] * x2 - self.a[0] * y1 - self.a[1] * y2;
            x2 = x1;
            x1 = *v;
            y2 = y1;
            y1 = y;
            *v = y;
        }
    }
}

/// Band-pass made of `order / 2` identical resonators whose cascade has the
/// requested full -3 dB bandwidth.
#[derive(Debug, Clone)]
pub struct BandPass {
    sections: Vec<Biquad>,
    fs: f64,
}

impl BandPass {
    pub fn new(f0: f64, bandwidth: f64, order: usize, fs: f64) -> Result<Self> {
        if order == 0 || order % 2 != 0 {
            return Err(Error::invalid("lock_in.order", "filter order must be even and positive"));
        }
        if !(bandwidth > 0.0 && f0 > bandwidth / 2.0 && fs > 2.0 * f0) {
            return Err(Error::invalid("lock_in", "need 0 < bandwidth < 2 f0 and f0 below Nyquist"));
        }
        let n = order / 2;
        // Analog guess: |H_section|^2 = 1/(1+u^2) and the cascade reaches 1/2
        // when (1+u^2)^n = 2. Then correct the digital warping by bisection on
        // the mean edge gain.
        let u = (2f64.powf(1.0 / n as f64) - 1.0).sqrt();
        let edge_gain = |section_bw: f64| {
            let s = Biquad::bandpass(f0, section_bw, fs);
            let g = |f: f64| s.response(f, fs).norm_sqr().powi(n as i32);
            0.5 * (g(f0 - bandwidth / 2.0) + g(f0 + bandwidth / 2.0))
        };
        let guess = bandwidth / u;
        let (mut lo, mut hi) = (0.5 * guess, 2.0 * guess);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if edge_gain(mid) < 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Self {
            sections: vec![Biquad::bandpass(f0, 0.5 * (lo + hi), fs); n],
            fs,
        })
    }

    pub fn response(&self, f: f64) -> C64 {
        self.sections.iter().map(|s| s.response(f, self.fs)).product()
    }

    pub fn filter(&self, x: &mut [f64]) {
        for s in &self.sections {
            s.filter(x);
        }
    }
}

/// Amplitude of the component of `signal` at `f_demod`.
///
/// The signal is band-passed, mixed with the reference and averaged over the
/// part of the record after the filter has settled (`10 / bandwidth`).
pub fn lock_in(signal: &[f64], sample_rate: f64, f_demod: f64, bandwidth: f64, order: usize) -> Result<f64> {
    if !(sample_rate > 4.0 * f_demod) {
        return Err(Error::invalid("lock_in.sample_rate", "must exceed four times the demodulation frequency"));
    }
    let duration = signal.len() as f64 / sample_rate;
    let settle = 10.0 / bandwidth;
    if duration < settle {
        return Err(Error::InsufficientSettling {
            duration,
            required: settle,
        });
    }
    let bp = BandPass::new(f_demod, bandwidth, order, sample_rate)?;
    let mut y = signal.to_vec();
    bp.filter(&mut y);

    // Average over the settled tail, trimmed to whole reference periods.
    let start = ((settle / 2.0) * sample_rate).ceil() as usize;
    let periods = ((y.len() - start) as f64 * f_demod / sample_rate).floor();
    let end = if periods >= 1.0 {
        start + (periods * sample_rate / f_demod).round() as usize
    } else {
        y.len()
    };
    let end = end.min(y.len());
    let mut acc = C64::new(0.0, 0.0);
    for (i, v) in y[start..end].iter().enumerate() {
        let t = (start + i) as f64 / sample_rate;
        acc += C64::from_polar(*v, -TAU * f_demod * t);
    }
    let mean = acc / (end - start) as f64;
    Ok(2.0 * mean.norm() / bp.response(f_demod).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(amp: f64, f: f64, fs: f64, secs: f64) -> Vec<f64> {
        (0..(fs * secs) as usize).map(|i| amp * (TAU * f * i as f64 / fs).cos()).collect()
    }

    #[test]
    fn filter_bandwidth_is_nineteen_hertz() {
        let bp = BandPass::new(5_000.0, 19.0, 4, 50_000.0).unwrap();
        assert!((bp.response(5_000.0).norm() - 1.0).abs() < 1e-12);
        for edge in [5_000.0 - 9.5, 5_000.0 + 9.5] {
            let g = bp.response(edge).norm_sqr();
            assert!((g - 0.5).abs() < 0.01, "gain^2 {g} at {edge}");
        }
    }

    #[test]
    fn out_of_band_rejection() {
        let bp = BandPass::new(5_000.0, 19.0, 4, 50_000.0).unwrap();
        let g = bp.response(5_000.0 + 190.0).norm();
        assert!(g < 0.01, "gain {g}");
        let x = tone(1.0, 5_190.0, 50_000.0, 2.0);
        let a = lock_in(&x, 50_000.0, 5_000.0, 19.0, 4).unwrap();
        assert!(a < 0.01, "{a}");
    }

    #[test]
    fn pure_tone_amplitude() {
        for (amp, f) in [(1.0, 1_000.0), (3.7, 5_000.0), (0.2, 6_000.0)] {
            let x = tone(amp, f, 50_000.0, 2.0);
            let got = lock_in(&x, 50_000.0, f, 19.0, 4).unwrap();
            assert!((got / amp - 1.0).abs() < 0.005, "{got} vs {amp}");
        }
    }

    #[test]
    fn short_record_is_rejected() {
        let x = tone(1.0, 1_000.0, 50_000.0, 0.3);
        assert!(matches!(
            lock_in(&x, 50_000.0, 1_000.0, 19.0, 4),
            Err(Error::InsufficientSettling { .. })
        ));
    }
}
