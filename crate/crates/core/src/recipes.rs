//! End-to-end pipelines shared by the command line and the acceptance runner.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::SystemParams;
use crate::noise::Ordering;
use crate::spectra::dips::{cancellation_window, dip_finder, CancellationWindow, Extremum, Window};
use crate::spectra::{QuadratureSelector, Sidedness, Source, SpectrumEngine, SpectrumResult, TransferSolver};

/// Half-width of the search window around each membrane resonance, in bare linewidths.
pub const DIP_WINDOW_LINEWIDTHS: f64 = 10.0;

/// One window per membrane, centred on the bare resonance.
pub fn resonance_windows(params: &SystemParams, linewidths: f64) -> Vec<Window> {
    params
        .mechanical
        .iter()
        .map(|m| Window::new(m.omega_m, linewidths * m.gamma_m, m.gamma_m))
        .collect()
}

pub fn find_dips(spec: &SpectrumResult, params: &SystemParams) -> Result<Vec<Extremum>> {
    dip_finder(spec, &resonance_windows(params, DIP_WINDOW_LINEWIDTHS))
}

/// Points within ten linewidths of each resonance, spaced a quarter linewidth.
pub fn fit_grid(params: &SystemParams) -> Vec<f64> {
    let mut g = Vec::new();
    for m in &params.mechanical {
        let step = m.gamma_m / 4.0;
        for i in -40..=40 {
            g.push(m.omega_m + i as f64 * step);
        }
    }
    g.sort_by(f64::total_cmp);
    g
}

#[derive(Debug, Clone)]
pub struct CancellationRun {
    pub total: SpectrumResult,
    /// Contribution of the injected amplitude noise alone.
    pub driven: SpectrumResult,
    pub thermal: SpectrumResult,
    pub window: Option<CancellationWindow>,
}

/// Spectrum between the two resonances and its cancellation metric.
pub fn cancellation(
    params: &SystemParams,
    sel: &QuadratureSelector,
    grid: &[f64],
    solver: &dyn TransferSolver,
    sided: Sidedness,
    ordering: Ordering,
) -> Result<CancellationRun> {
    let engine = SpectrumEngine::new(params, solver)?.ordering(ordering);
    let total = engine.psd(sel, grid, sided)?;
    let driven = engine.psd_filtered(sel, grid, sided, &[Source::Amplitude])?;
    let thermal = engine.psd_filtered(sel, grid, sided, &[Source::Thermal])?;
    let (lo, hi) = span(params);
    let window = cancellation_window(&total, &driven, &thermal, lo, hi);
    Ok(CancellationRun {
        total,
        driven,
        thermal,
        window,
    })
}

/// From ten linewidths below the lower resonance to ten above the upper one.
pub fn span(params: &SystemParams) -> (f64, f64) {
    let lo = params
        .mechanical
        .iter()
        .map(|m| m.omega_m - DIP_WINDOW_LINEWIDTHS * m.gamma_m)
        .fold(f64::INFINITY, f64::min);
    let hi = params
        .mechanical
        .iter()
        .map(|m| m.omega_m + DIP_WINDOW_LINEWIDTHS * m.gamma_m)
        .fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Summary of a cancellation run for reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CancellationSummary {
    pub eps_m_sq: f64,
    pub window: Option<CancellationWindow>,
}
