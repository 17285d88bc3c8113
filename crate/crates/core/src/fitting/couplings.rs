//! Least-squares estimate of the membrane-pump couplings from a spectrum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lm::{levenberg_marquardt, LmOptions, LmOutcome};
use super::{FitReport, IdentifiabilityWarning};
use crate::error::{Error, Result};
use crate::model::{SystemParams, PROBE, PUMP};
use crate::spectra::{QuadratureSelector, Sidedness, SpectrumEngine, SpectrumResult, TransferSolver};
use crate::units::hz_to_rad;

#[derive(Debug, Clone)]
pub struct CouplingFitOptions {
    pub starts: usize,
    pub seed: u64,
    /// Also fit an overall detection scale (as `ln A`).
    pub fit_scale: bool,
    /// Keep the probe couplings equal to the pump couplings during the fit.
    pub tie_probe: bool,
    /// Range of the log-uniform random starts, rad/s.
    pub start_range: (f64, f64),
    pub lm: LmOptions,
}

impl Default for CouplingFitOptions {
    fn default() -> Self {
        Self {
            starts: 3,
            seed: 0,
            fit_scale: true,
            tie_probe: true,
            start_range: (hz_to_rad(0.05), hz_to_rad(1.0)),
            lm: LmOptions::default(),
        }
    }
}

/// A parameter counts as unidentified when a 10 % change of its typical size
/// moves no log-spectrum point by more than 1 %.
const FLAT_PERTURBATION: f64 = 0.1;
const FLAT_TOLERANCE: f64 = 0.01;

/// Fits `g0[j][PUMP]` for both membranes (and optionally `ln A`) by minimising
/// `sum (ln S_model - ln S_meas)^2` over the grid of `measured`.
pub fn fit_couplings(
    measured: &SpectrumResult,
    base: &SystemParams,
    sel: &QuadratureSelector,
    solver: &dyn TransferSolver,
    opts: &CouplingFitOptions,
) -> Result<FitReport> {
    if measured.values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::invalid("measured", "log-space fit needs strictly positive spectral values"));
    }
    let sided = measured.meta.sided;
    let log_meas: Vec<f64> = measured.values.iter().map(|v| v.ln()).collect();
    let grid = measured.omega.clone();
    let model_params = |x: &[f64]| {
        let mut p = base.clone();
        for j in 0..2 {
            p.couplings.g0[j][PUMP] = x[j];
            if opts.tie_probe {
                p.couplings.g0[j][PROBE] = x[j];
            }
        }
        p
    };
    let residuals = |x: &[f64]| -> Result<Vec<f64>> {
        let p = model_params(x);
        let spec = SpectrumEngine::new(&p, solver)?.psd(sel, &grid, sided)?;
        let ln_a = if opts.fit_scale { x[2] } else { 0.0 };
        Ok(spec
            .values
            .iter()
            .zip(&log_meas)
            .map(|(m, d)| m.max(f64::MIN_POSITIVE).ln() + ln_a - d)
            .collect())
    };

    let n = if opts.fit_scale { 3 } else { 2 };
    let g_scale = (opts.start_range.0 * opts.start_range.1).sqrt();
    let scale: Vec<f64> = (0..n).map(|i| if i < 2 { g_scale } else { 1.0 }).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (lo, hi) = (opts.start_range.0.ln(), opts.start_range.1.ln());

    let mut best: Option<LmOutcome> = None;
    let mut last_err = None;
    for _ in 0..opts.starts.max(1) {
        let mut x0: Vec<f64> = (0..2).map(|_| rng.random_range(lo..hi).exp()).collect();
        if opts.fit_scale {
            // start the scale at its best value for these couplings
            let r = residuals(&[x0[0], x0[1], 0.0])?;
            x0.push(-r.iter().sum::<f64>() / r.len() as f64);
        }
        match levenberg_marquardt(&residuals, &x0, &scale, &opts.lm) {
            Ok(out) => {
                if best.as_ref().is_none_or(|b| out.cost < b.cost) {
                    best = Some(out);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let Some(out) = best else {
        return Err(last_err.expect("at least one start ran"));
    };

    let mut names = vec![format!("g0_{}_{}", 0, PUMP), format!("g0_{}_{}", 1, PUMP)];
    if opts.fit_scale {
        names.push("ln_a".into());
    }
    let mut report = FitReport::from_outcome(names.clone(), &out);
    // b_j -> -b_j maps g0_j -> -g0_j without changing any output, so only
    // the magnitude is measurable
    for g in report.estimates.iter_mut().take(2) {
        *g = g.abs();
    }
    for (i, name) in names.iter().enumerate().take(2) {
        let col_max = out.jacobian.column(i).iter().map(|v| v.abs()).fold(0.0, f64::max);
        if col_max * FLAT_PERTURBATION * scale[i] < FLAT_TOLERANCE {
            report.warnings.push(IdentifiabilityWarning {
                parameter: name.clone(),
                reason: "log-spectrum is flat within 1% along this coupling".into(),
            });
            log::warn!("coupling {name} is not identifiable from these data");
        }
    }
    Ok(report)
}

/// Spectrum of `params` on the given grid, for building synthetic fit data.
pub fn synthetic_spectrum(
    params: &SystemParams,
    sel: &QuadratureSelector,
    grid: &[f64],
    solver: &dyn TransferSolver,
    sided: Sidedness,
) -> Result<SpectrumResult> {
    SpectrumEngine::new(params, solver)?.psd(sel, grid, sided)
}
