//! Local extrema of spectra inside frequency windows.

use serde::{Deserialize, Serialize};

use super::SpectrumResult;
use crate::error::{Error, Result};

/// Minimum number of grid points per linewidth inside a window.
pub const MIN_POINTS_PER_LINEWIDTH: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub center: f64,
    pub halfwidth: f64,
    /// Narrowest feature the window must resolve.
    pub linewidth: f64,
}

impl Window {
    pub fn new(center: f64, halfwidth: f64, linewidth: f64) -> Self {
        Self {
            center,
            halfwidth,
            linewidth,
        }
    }

    fn range(&self, spec: &SpectrumResult) -> std::ops::Range<usize> {
        let lo = spec.omega.partition_point(|&w| w < self.center - self.halfwidth);
        let hi = spec.omega.partition_point(|&w| w <= self.center + self.halfwidth);
        lo..hi
    }

    fn check_resolution(&self, spec: &SpectrumResult) -> Result<std::ops::Range<usize>> {
        let r = self.range(spec);
        let limit = self.linewidth / MIN_POINTS_PER_LINEWIDTH;
        let pts = &spec.omega[r.clone()];
        let spacing = if pts.len() < 2 {
            f64::INFINITY
        } else {
            pts.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
        };
        if spacing > limit {
            return Err(Error::WindowTooCoarse {
                center: self.center,
                spacing,
                limit,
            });
        }
        Ok(r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    /// Index of the window the extremum was found in.
    pub window: usize,
    pub omega: f64,
    pub value: f64,
    /// Mean of the two window-edge values.
    pub baseline: f64,
    /// `10 log10(baseline / value)` for dips, `10 log10(value / baseline)` for peaks.
    pub depth_db: f64,
}

/// Deepest strict interior local minimum of each window, if any.
pub fn dip_finder(spec: &SpectrumResult, windows: &[Window]) -> Result<Vec<Extremum>> {
    find(spec, windows, false)
}

/// Highest strict interior local maximum of each window, if any.
pub fn peak_finder(spec: &SpectrumResult, windows: &[Window]) -> Result<Vec<Extremum>> {
    find(spec, windows, true)
}

fn find(spec: &SpectrumResult, windows: &[Window], peaks: bool) -> Result<Vec<Extremum>> {
    let mut out = Vec::new();
    for (wi, win) in windows.iter().enumerate() {
        let r = win.check_resolution(spec)?;
        let v = &spec.values[r.clone()];
        if v.len() < 3 {
            continue;
        }
        let sign = if peaks { -1.0 } else { 1.0 };
        let key = |i: usize| sign * v[i];
        let best = (1..v.len() - 1)
            .filter(|&i| key(i) < key(i - 1) && key(i) < key(i + 1))
            .min_by(|&a, &b| key(a).total_cmp(&key(b)));
        let Some(i) = best else { continue };
        let baseline = 0.5 * (v[0] + v[v.len() - 1]);
        let ratio = if peaks { v[i] / baseline } else { baseline / v[i] };
        out.push(Extremum {
            window: wi,
            omega: spec.omega[r.start + i],
            value: v[i],
            baseline,
            depth_db: 10.0 * ratio.log10(),
        });
    }
    Ok(out)
}

/// Window between two resonances where the response to a common drive cancels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CancellationWindow {
    pub omega_min: f64,
    pub value: f64,
    pub left_peak: f64,
    pub right_peak: f64,
    /// Width of the notch at the level halfway (in dB) between its bottom and the lower peak.
    pub width_half_depth: f64,
    /// Width of the notch below the highest thermal-only value between the peaks (0 if never below).
    pub width_below_thermal: f64,
}

/// Locates the cancellation notch of `total` between `lo` and `hi`.
///
/// `driven` is the part of the spectrum due to the common drive; the metric is
/// emitted only when that part shows two peaks with a notch between them.
/// `thermal` sets the reference level for the width.
pub fn cancellation_window(
    total: &SpectrumResult,
    driven: &SpectrumResult,
    thermal: &SpectrumResult,
    lo: f64,
    hi: f64,
) -> Option<CancellationWindow> {
    let a = total.omega.partition_point(|&w| w < lo);
    let b = total.omega.partition_point(|&w| w <= hi);
    if b < a + 3 {
        return None;
    }
    let d = &driven.values[a..b];
    let scale = d.iter().copied().fold(0.0, f64::max);
    if !(scale > 0.0) {
        return None;
    }
    let maxima: Vec<usize> = (1..d.len() - 1).filter(|&i| d[i] > d[i - 1] && d[i] >= d[i + 1]).collect();
    if maxima.len() < 2 {
        return None;
    }
    let (p1, p2) = (maxima[0], maxima[maxima.len() - 1]);
    let notch = (p1..=p2).min_by(|&x, &y| d[x].total_cmp(&d[y]))?;
    if !(d[notch] < d[p1] && d[notch] < d[p2]) {
        return None;
    }

    let t = &total.values[a..b];
    let tp1 = (0..notch).max_by(|&x, &y| t[x].total_cmp(&t[y]))?;
    let tp2 = (notch + 1..t.len()).max_by(|&x, &y| t[x].total_cmp(&t[y]))?;
    let imin = (tp1..=tp2).min_by(|&x, &y| t[x].total_cmp(&t[y]))?;
    if !(t[imin] < t[tp1] && t[imin] < t[tp2]) {
        return None;
    }
    let omega = &total.omega[a..b];
    let width_below = |level: f64| {
        if t[imin] >= level {
            return 0.0;
        }
        let mut lo = imin;
        while lo > tp1 && t[lo - 1] < level {
            lo -= 1;
        }
        let mut hi = imin;
        while hi < tp2 && t[hi + 1] < level {
            hi += 1;
        }
        omega[hi] - omega[lo]
    };
    let half = (t[imin] * t[tp1].min(t[tp2])).sqrt();
    let thermal_level = thermal.values[a + tp1..=a + tp2].iter().copied().fold(0.0, f64::max);
    Some(CancellationWindow {
        omega_min: omega[imin],
        value: t[imin],
        left_peak: t[tp1],
        right_peak: t[tp2],
        width_half_depth: width_below(half),
        width_below_thermal: width_below(thermal_level),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemParams;
    use crate::presets;
    use crate::spectra::{SpectrumMeta, Sidedness};
    use crate::noise::Ordering;

    fn spectrum(omega: Vec<f64>, f: impl Fn(f64) -> f64) -> SpectrumResult {
        let p: SystemParams = presets::table1();
        let values = omega.iter().map(|&w| f(w)).collect();
        SpectrumResult {
            omega,
            values,
            meta: SpectrumMeta::new(&p, "test", "synthetic".into(), Sidedness::TwoSided, Ordering::Quantum),
        }
    }

    fn lorentz(w: f64, c: f64, g: f64) -> f64 {
        (g / 2.0).powi(2) / ((w - c).powi(2) + (g / 2.0).powi(2))
    }

    #[test]
    fn recovers_notch_of_double_lorentzian() {
        let grid: Vec<f64> = (0..2001).map(|i| 100.0 + 0.05 * i as f64).collect();
        let notch = 150.3;
        let s = spectrum(grid.clone(), |w| {
            (lorentz(w, 130.0, 10.0) + lorentz(w, 170.0, 10.0)) * (1.0 - 0.5 * lorentz(w, notch, 2.0))
        });
        let dips = dip_finder(&s, &[Window::new(150.0, 8.0, 2.0)]).unwrap();
        assert_eq!(dips.len(), 1);
        assert!((dips[0].omega - notch).abs() <= 0.05 + 1e-9);
        assert!(dips[0].depth_db > 0.0);
    }

    #[test]
    fn flat_spectrum_has_no_dips() {
        let grid: Vec<f64> = (0..500).map(|i| i as f64).collect();
        let s = spectrum(grid, |_| 3.0);
        assert!(dip_finder(&s, &[Window::new(250.0, 100.0, 10.0)]).unwrap().is_empty());
    }

    #[test]
    fn coarse_window_is_rejected() {
        let grid: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let s = spectrum(grid, |w| w);
        let err = dip_finder(&s, &[Window::new(50.0, 10.0, 4.0)]).unwrap_err();
        assert!(matches!(err, Error::WindowTooCoarse { .. }));
    }

    #[test]
    fn single_peak_has_no_cancellation() {
        let grid: Vec<f64> = (0..1000).map(|i| i as f64 * 0.1).collect();
        let one = spectrum(grid.clone(), |w| lorentz(w, 40.0, 3.0));
        let base = spectrum(grid, |_| 0.0);
        assert!(cancellation_window(&one, &one, &base, 0.0, 100.0).is_none());
    }
}
