//! Time-domain cross-check: classical stochastic simulation of the linearised
//! equations and Welch estimates of the recorded outputs.
//!
//! The simulation uses symmetrized noise strengths, so it must be compared
//! with spectra computed under [`Ordering::Symmetrized`]. Outputs are exact
//! box averages over each sample interval; [`expected_welch`] folds the same
//! sampling and the Hann window into the analytic spectrum.

pub mod integrator;
pub mod ou;
pub mod sde;
pub mod welch;

use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use integrator::{by_name as integrator_by_name, check_stable, Integrator, IntegratorRegistry};
pub use ou::OuProcess;
pub use sde::{LinearSde, OracleOutput};
pub use welch::{hann_kernel, welch, Welch};

use crate::error::{Error, Result};
use crate::model::{SteadyState, SystemParams};
use crate::noise::Ordering;
use crate::spectra::{QuadratureSelector, Sidedness, SpectrumEngine, SpectrumMeta, SpectrumResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Sample interval, s.
    pub dt: f64,
    /// Recorded duration after burn-in, s.
    pub duration: f64,
    /// Burn-in, s; defaults to 20 slowest decay times.
    pub burn_in: Option<f64>,
    pub seed: u64,
    /// Samples per Welch segment.
    pub segment: usize,
    pub overlap: f64,
    pub integrator: String,
    /// Number of leading samples of every state and output to keep.
    pub record: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1.0 / 1_048_576.0,
            duration: 1.0,
            burn_in: None,
            seed: 0,
            segment: 1 << 16,
            overlap: 0.5,
            integrator: "exact".into(),
            record: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("oracle.dt", "must be positive"));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::invalid("oracle.duration", "must be positive"));
        }
        if let Some(b) = self.burn_in {
            if !(b >= 0.0 && b.is_finite()) {
                return Err(Error::invalid("oracle.burn_in", "must be non-negative"));
            }
        }
        let samples = (self.duration / self.dt).round() as usize;
        if samples < self.segment {
            return Err(Error::TooShortSeries {
                len: samples,
                segment: self.segment,
            });
        }
        Ok(())
    }

    /// Number of Welch segments the run will average.
    pub fn expected_segments(&self) -> usize {
        let samples = (self.duration / self.dt).round() as usize;
        let hop = ((self.segment as f64) * (1.0 - self.overlap)).round().max(1.0) as usize;
        if samples < self.segment {
            0
        } else {
            1 + (samples - self.segment) / hop
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleRun {
    pub omega: Vec<f64>,
    /// One Welch spectrum per requested output.
    pub psd: Vec<Vec<f64>>,
    pub labels: Vec<String>,
    pub segments: usize,
    pub samples: usize,
    pub dt: f64,
    pub segment_duration: f64,
    /// Leading samples, state coordinates first and outputs after.
    pub series: Vec<Vec<f64>>,
    pub integrator: String,
}

impl OracleRun {
    pub fn spectrum(&self, params: &SystemParams, output: usize) -> SpectrumResult {
        let mut meta = SpectrumMeta::new(
            params,
            &format!("oracle-{}", self.integrator),
            self.labels[output].clone(),
            Sidedness::TwoSided,
            Ordering::Symmetrized,
        );
        meta.extra.insert("segments".into(), self.segments.to_string());
        meta.extra.insert("dt_s".into(), format!("{:e}", self.dt));
        meta.extra.insert("segment_s".into(), format!("{:e}", self.segment_duration));
        SpectrumResult {
            omega: self.omega.clone(),
            values: self.psd[output].clone(),
            meta,
        }
    }
}

/// Integrates the fluctuation equations and Welch-averages every output.
pub fn integrate(
    params: &SystemParams,
    steady: &SteadyState,
    outputs: &[OracleOutput],
    cfg: &SimConfig,
) -> Result<OracleRun> {
    cfg.validate()?;
    for o in outputs {
        if let OracleOutput::Quadrature(sel) = o {
            sel.validate()?;
        }
    }
    let sde = sde::build(params, steady, outputs);
    let slowest = check_stable(&sde.a)?;
    let integrator = integrator_by_name(&cfg.integrator)?;
    let mut stepper = integrator.prepare(&sde, cfg.dt)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let n = sde.states();
    let p = outputs.len();
    let mut state = vec![0.0; n];
    let mut y = vec![0.0; p];
    let burn = cfg.burn_in.unwrap_or(20.0 / -slowest);
    let burn_steps = (burn / cfg.dt).ceil() as usize;
    log::info!(
        "oracle: {} states, {} channels, burn-in {burn_steps} steps, {} samples",
        n,
        sde.channels(),
        (cfg.duration / cfg.dt).round()
    );
    for _ in 0..burn_steps {
        stepper.step(&mut state, &mut y, &mut rng);
    }

    let samples = (cfg.duration / cfg.dt).round() as usize;
    let mut welches = (0..p)
        .map(|_| Welch::new(cfg.segment, cfg.overlap, cfg.dt))
        .collect::<Result<Vec<_>>>()?;
    let keep = cfg.record.min(samples);
    let mut series = vec![Vec::with_capacity(keep); n + p];
    for s in 0..samples {
        stepper.step(&mut state, &mut y, &mut rng);
        for (w, &v) in welches.iter_mut().zip(&y) {
            w.push(v);
        }
        if s < keep {
            for (i, v) in state.iter().chain(&y).enumerate() {
                series[i].push(*v);
            }
        }
    }
    let mut psd = Vec::with_capacity(p);
    let mut omega = Vec::new();
    for w in &welches {
        let (om, v) = w.finish()?;
        omega = om;
        psd.push(v);
    }
    let segments = welches.first().map_or(0, |w| w.segments());
    Ok(OracleRun {
        omega,
        psd,
        labels: outputs.iter().map(|o| o.label()).collect(),
        segments,
        samples,
        dt: cfg.dt,
        segment_duration: cfg.segment as f64 * cfg.dt,
        series,
        integrator: integrator.name().to_string(),
    })
}

/// Alias orders folded into [`expected_welch`].
const ALIAS_ORDERS: i32 = 20;
/// Kernel support in bins and fine-grid points per bin.
const KERNEL_BINS: usize = 16;
const SUBSAMPLES: usize = 16;

fn sinc2(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (x.sin() / x).powi(2)
    }
}

/// Expected Welch value at each of the contiguous, uniformly spaced bins
/// `omega` for box-averaged samples at interval `dt` and Hann segments of
/// duration `segment_duration`.
///
/// The white limit of the spectrum is carried exactly (box averaging keeps
/// it flat); the remainder is weighted by `sinc^2`, folded over
/// +-[`ALIAS_ORDERS`] sampling images and smoothed by the window kernel.
pub fn expected_welch(
    engine: &SpectrumEngine<'_>,
    sel: &QuadratureSelector,
    omega: &[f64],
    dt: f64,
    segment_duration: f64,
) -> Result<Vec<f64>> {
    if omega.is_empty() {
        return Ok(Vec::new());
    }
    let bin = TAU / segment_duration;
    let params = engine.params;
    let mut fastest: f64 = 0.0;
    for k in 0..2 {
        fastest = fastest.max(params.optical[k].kappa()).max(params.optical[k].detuning0.abs());
        fastest = fastest.max(params.mechanical[k].omega_m);
        let l = &params.noise.lasers[k];
        fastest = fastest.max(l.gamma_eps_bw).max(l.gamma_phi_bw);
    }
    let white = engine.point(sel, 1e9 * fastest.max(1.0))?.re;
    let coloured = |w: f64| -> Result<f64> { Ok(engine.point(sel, w)?.re - white) };
    let ws = TAU / dt;

    let delta = bin / SUBSAMPLES as f64;
    let pad = (KERNEL_BINS * SUBSAMPLES) as i64;
    let start = omega[0];
    let fine_len = ((omega[omega.len() - 1] - start) / delta).round() as i64 + 2 * pad + 1;
    let fine: Vec<f64> = (0..fine_len)
        .into_par_iter()
        .map(|i| {
            let w = start + (i - pad) as f64 * delta;
            coloured(w).map(|s| s * sinc2(0.5 * w * dt))
        })
        .collect::<Result<_>>()?;
    let kernel: Vec<f64> = (-pad..=pad)
        .map(|i| hann_kernel(i as f64 * delta / TAU, segment_duration) * delta / TAU)
        .collect();

    omega
        .par_iter()
        .map(|&w| {
            let centre = ((w - start) / delta).round() as i64 + pad;
            let mut acc = 0.0;
            for (ki, kv) in kernel.iter().enumerate() {
                acc += kv * fine[(centre - pad + ki as i64) as usize];
            }
            for m in (-ALIAS_ORDERS..=ALIAS_ORDERS).filter(|&m| m != 0) {
                let wm = w + m as f64 * ws;
                acc += coloured(wm)? * sinc2(0.5 * wm * dt);
            }
            Ok(white + acc)
        })
        .collect()
}

/// `max |P_oracle / P_expected - 1|`.
pub fn max_relative_deviation(oracle: &[f64], expected: &[f64]) -> f64 {
    oracle
        .iter()
        .zip(expected)
        .map(|(o, e)| (o / e - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Indices of the Welch bins inside `[lo, hi]`.
pub fn band(omega: &[f64], lo: f64, hi: f64) -> std::ops::Range<usize> {
    omega.partition_point(|&w| w < lo)..omega.partition_point(|&w| w <= hi)
}
