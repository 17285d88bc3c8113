//! Frequency grids, rad/s.

use crate::error::{Error, Result};
use crate::model::SystemParams;

use super::Sidedness;

pub const DEFAULT_POINTS: usize = 4001;
pub const POINTS_PER_LINEWIDTH: f64 = 16.0;
/// Half-span of the refined region around each resonance, in linewidths.
pub const REFINE_HALF_SPAN: f64 = 20.0;

pub fn linear(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(Error::invalid("grid.points", "grid is empty"));
    }
    if !(start.is_finite() && stop.is_finite()) {
        return Err(Error::invalid("grid", "non-finite band edge"));
    }
    if points == 1 {
        return Ok(vec![start]);
    }
    if stop <= start {
        return Err(Error::invalid("grid", "upper band edge must exceed the lower one"));
    }
    let step = (stop - start) / (points - 1) as f64;
    Ok((0..points).map(|i| start + step * i as f64).collect())
}

/// Adds uniformly spaced points at `linewidth / POINTS_PER_LINEWIDTH` around
/// each mechanical resonance lying inside the band.
pub fn refined(base: &[f64], params: &SystemParams) -> Vec<f64> {
    let (Some(&lo), Some(&hi)) = (base.first(), base.last()) else {
        return Vec::new();
    };
    let mut out = base.to_vec();
    for m in &params.mechanical {
        let step = m.gamma_m / POINTS_PER_LINEWIDTH;
        let half = REFINE_HALF_SPAN * m.gamma_m;
        let n = (2.0 * half / step).round() as i64;
        for i in 0..=n {
            let w = m.omega_m - half + step * i as f64;
            if w >= lo && w <= hi {
                out.push(w);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs().max(1.0));
    out
}

pub fn validate(grid: &[f64], sided: Sidedness) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "grid is empty"));
    }
    if grid.iter().any(|w| !w.is_finite()) {
        return Err(Error::invalid("grid", "non-finite frequency"));
    }
    if grid.windows(2).any(|p| p[1] < p[0]) {
        return Err(Error::invalid("grid", "frequencies must be sorted"));
    }
    if sided == Sidedness::OneSided && grid[0] < 0.0 {
        return Err(Error::invalid("grid", "one-sided spectra need non-negative frequencies"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::units::hz_to_rad;

    #[test]
    fn linear_grid_endpoints() {
        let g = linear(1.0, 2.0, 5).unwrap();
        assert_eq!(g, vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        assert!(linear(1.0, 2.0, 0).is_err());
        assert!(linear(2.0, 1.0, 3).is_err());
    }

    #[test]
    fn refinement_resolves_linewidth() {
        let p = presets::fig4c();
        let base = linear(hz_to_rad(224e3), hz_to_rad(234e3), 401).unwrap();
        let g = refined(&base, &p);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        for m in &p.mechanical {
            let near: Vec<f64> = g.iter().copied().filter(|w| (w - m.omega_m).abs() < 5.0 * m.gamma_m).collect();
            let max_gap = near.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
            assert!(max_gap <= m.gamma_m / 16.0 * 1.0001);
        }
    }
}
