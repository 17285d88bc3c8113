//! Joint Lorentzian fits of resonance peaks.

use serde::{Deserialize, Serialize};

use super::lm::{levenberg_marquardt, LmOptions};
use super::FitReport;
use crate::error::{Error, Result};
use crate::spectra::dips::Window;
use crate::spectra::SpectrumResult;

pub const MIN_WINDOW_POINTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzianPeak {
    /// rad/s
    pub center: f64,
    /// Full width at half maximum, rad/s.
    pub fwhm: f64,
    /// Integral of the peak over omega.
    pub area: f64,
    /// Shared flat background.
    pub offset: f64,
}

impl LorentzianPeak {
    /// Peak value without the offset.
    pub fn eval(&self, omega: f64) -> f64 {
        let hw = self.fwhm / 2.0;
        self.area * (hw / std::f64::consts::PI) / ((omega - self.center).powi(2) + hw * hw)
    }
}

/// Sum of peaks plus common offset.
pub fn model(peaks: &[LorentzianPeak], offset: f64, omega: f64) -> f64 {
    offset + peaks.iter().map(|p| p.eval(omega)).sum::<f64>()
}

/// Fits one Lorentzian per window, jointly, with a shared offset. Residuals are
/// relative to the data, so the fit weighs the wings and the peaks alike.
pub fn fit_lorentzians(spec: &SpectrumResult, windows: &[Window]) -> Result<(Vec<LorentzianPeak>, FitReport)> {
    if windows.is_empty() {
        return Err(Error::DegenerateWindow("no fit windows".into()));
    }
    let mut idx: Vec<usize> = Vec::new();
    let mut x0 = Vec::new();
    let mut scale = Vec::new();
    let mut offset0 = f64::INFINITY;
    let mut names = Vec::new();
    for (wi, w) in windows.iter().enumerate() {
        let lo = spec.omega.partition_point(|&o| o < w.center - w.halfwidth);
        let hi = spec.omega.partition_point(|&o| o <= w.center + w.halfwidth);
        if hi - lo < MIN_WINDOW_POINTS {
            return Err(Error::DegenerateWindow(format!(
                "window {wi} holds {} points, need {MIN_WINDOW_POINTS}",
                hi - lo
            )));
        }
        let vals = &spec.values[lo..hi];
        let (imax, &vmax) = vals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty window");
        let vmin = vals.iter().copied().fold(f64::INFINITY, f64::min);
        if !(vmin > 0.0) {
            return Err(Error::DegenerateWindow(format!("window {wi} has non-positive values")));
        }
        if vmax - vmin <= 1e-9 * vmax {
            return Err(Error::DegenerateWindow(format!("window {wi} contains no resolved peak")));
        }
        offset0 = offset0.min(vmin);
        let half = vmin + 0.5 * (vmax - vmin);
        let above = vals.iter().filter(|&&v| v >= half).count().max(1);
        let spacing = (spec.omega[hi - 1] - spec.omega[lo]) / (hi - lo - 1) as f64;
        let fwhm = (above as f64 * spacing).max(spacing);
        let area = (vmax - vmin) * std::f64::consts::PI * fwhm / 2.0;
        x0.extend([spec.omega[lo + imax], fwhm.ln(), area.ln()]);
        scale.extend([fwhm, 1.0, 1.0]);
        names.extend([format!("center_{wi}"), format!("fwhm_{wi}"), format!("area_{wi}")]);
        idx.extend(lo..hi);
    }
    idx.sort_unstable();
    idx.dedup();
    x0.push(offset0 * 0.5);
    scale.push(offset0.abs().max(f64::MIN_POSITIVE));
    names.push("offset".into());

    let omega: Vec<f64> = idx.iter().map(|&i| spec.omega[i]).collect();
    let data: Vec<f64> = idx.iter().map(|&i| spec.values[i]).collect();
    let n_peaks = windows.len();
    let unpack = |x: &[f64]| -> (Vec<LorentzianPeak>, f64) {
        let off = x[3 * n_peaks];
        let peaks = (0..n_peaks)
            .map(|p| LorentzianPeak {
                center: x[3 * p],
                fwhm: x[3 * p + 1].exp(),
                area: x[3 * p + 2].exp(),
                offset: off,
            })
            .collect();
        (peaks, off)
    };
    let residuals = |x: &[f64]| -> Result<Vec<f64>> {
        let (peaks, off) = unpack(x);
        Ok(omega
            .iter()
            .zip(&data)
            .map(|(&w, &d)| (model(&peaks, off, w) - d) / d)
            .collect())
    };
    let out = levenberg_marquardt(residuals, &x0, &scale, &LmOptions::default())?;
    let (peaks, _) = unpack(&out.params);

    // Report in natural units: propagate the log-parameter uncertainties.
    let mut report = FitReport::from_outcome(names, &out);
    for (p, peak) in peaks.iter().enumerate() {
        report.estimates[3 * p + 1] = peak.fwhm;
        report.uncertainties[3 * p + 1] *= peak.fwhm;
        report.estimates[3 * p + 2] = peak.area;
        report.uncertainties[3 * p + 2] *= peak.area;
    }
    Ok((peaks, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::Ordering;
    use crate::presets;
    use crate::spectra::{Sidedness, SpectrumMeta};

    fn synthetic(peaks: &[LorentzianPeak], grid: Vec<f64>) -> SpectrumResult {
        let off = peaks[0].offset;
        let values = grid.iter().map(|&w| model(peaks, off, w)).collect();
        SpectrumResult {
            omega: grid,
            values,
            meta: SpectrumMeta::new(&presets::table1(), "synthetic", "lorentz".into(), Sidedness::TwoSided, Ordering::Quantum),
        }
    }

    #[test]
    fn exact_single_peak_recovery() {
        let truth = LorentzianPeak {
            center: 1000.0,
            fwhm: 3.0,
            area: 50.0,
            offset: 0.2,
        };
        let grid: Vec<f64> = (0..400).map(|i| 970.0 + 0.15 * i as f64).collect();
        let s = synthetic(&[truth], grid);
        let (peaks, rep) = fit_lorentzians(&s, &[Window::new(1000.5, 25.0, 3.0)]).unwrap();
        assert!(rep.converged);
        let p = peaks[0];
        assert!((p.center - truth.center).abs() < 1e-9 * truth.center);
        assert!((p.fwhm / truth.fwhm - 1.0).abs() < 1e-9);
        assert!((p.area / truth.area - 1.0).abs() < 1e-9);
        assert!((p.offset / truth.offset - 1.0).abs() < 1e-9);
    }

    #[test]
    fn offset_only_is_degenerate() {
        let grid: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let flat = LorentzianPeak {
            center: 50.0,
            fwhm: 1.0,
            area: 0.0,
            offset: 2.0,
        };
        let s = synthetic(&[flat], grid);
        assert!(matches!(
            fit_lorentzians(&s, &[Window::new(50.0, 30.0, 1.0)]),
            Err(Error::DegenerateWindow(_))
        ));
    }

    #[test]
    fn too_few_points_is_degenerate() {
        let grid: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let p = LorentzianPeak {
            center: 50.0,
            fwhm: 4.0,
            area: 10.0,
            offset: 0.1,
        };
        let s = synthetic(&[p], grid);
        assert!(matches!(
            fit_lorentzians(&s, &[Window::new(50.0, 5.0, 4.0)]),
            Err(Error::DegenerateWindow(_))
        ));
    }
}
