//! Noise inputs and their frequency-domain correlations.
//!
//! Fourier convention: `f(omega) = ∫ f(t) e^{i omega t} dt`, and
//! `<n_i(omega) n_j(omega')> = 2π C_ij(omega) δ(omega + omega')`.
//!
//! Basis order (the index map is part of the public contract):
//!
//! | index | input |
//! |-------|-------|
//! | 0, 1 | `a_in` mirror 1, mode 0 (and dagger) |
//! | 2, 3 | `a_in` mirror 2, mode 0 (and dagger) |
//! | 4, 5 | `a_in` mirror 1, mode 1 (and dagger) |
//! | 6, 7 | `a_in` mirror 2, mode 1 (and dagger) |
//! | 8, 9 | `b_in` membrane 0 (and dagger) |
//! | 10, 11 | `b_in` membrane 1 (and dagger) |
//! | 12, 13 | amplitude noise `eps` of laser 0, 1 |
//! | 14, 15 | frequency noise `phidot` of laser 0, 1 |
//! | 16..20 | loss-port vacuum of mode 0, 1 (only with `include_loss_port`) |

use serde::{Deserialize, Serialize};

use crate::model::{LaserNoise, SystemParams};

pub const BASE_INPUTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseBasis {
    pub include_loss_port: bool,
}

impl NoiseBasis {
    pub fn new(include_loss_port: bool) -> Self {
        Self { include_loss_port }
    }

    pub fn for_params(params: &SystemParams) -> Self {
        Self::new(params.include_loss_port)
    }

    pub fn len(&self) -> usize {
        if self.include_loss_port {
            BASE_INPUTS + 4
        } else {
            BASE_INPUTS
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Optical vacuum at mirror `mirror` (1 or 2) of mode `mode`.
    pub fn a_in(&self, mirror: usize, mode: usize, dagger: bool) -> usize {
        debug_assert!(mirror == 1 || mirror == 2);
        4 * mode + 2 * (mirror - 1) + dagger as usize
    }

    pub fn b_in(&self, membrane: usize, dagger: bool) -> usize {
        8 + 2 * membrane + dagger as usize
    }

    pub fn eps(&self, laser: usize) -> usize {
        12 + laser
    }

    pub fn phidot(&self, laser: usize) -> usize {
        14 + laser
    }

    pub fn a_loss(&self, mode: usize, dagger: bool) -> Option<usize> {
        self.include_loss_port.then(|| 16 + 2 * mode + dagger as usize)
    }

    /// Index of the hermitian-conjugate partner; real inputs are their own partner.
    pub fn partner(&self, i: usize) -> usize {
        match i {
            0..=11 | 16..=19 => i ^ 1,
            _ => i,
        }
    }

    pub fn labels(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.len());
        for mode in 0..2 {
            for mirror in 1..=2 {
                out.push(format!("a_in[{mirror},{mode}]"));
                out.push(format!("a_in[{mirror},{mode}]^dag"));
            }
        }
        for j in 0..2 {
            out.push(format!("b_in[{j}]"));
            out.push(format!("b_in[{j}]^dag"));
        }
        for k in 0..2 {
            out.push(format!("eps[{k}]"));
        }
        for k in 0..2 {
            out.push(format!("phidot[{k}]"));
        }
        if self.include_loss_port {
            for mode in 0..2 {
                out.push(format!("a_loss[{mode}]"));
                out.push(format!("a_loss[{mode}]^dag"));
            }
        }
        out
    }
}

/// Operator ordering used for the white optical and thermal inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ordering {
    /// `<a a^dag> = 1`, `<a^dag a> = 0`, `<b b^dag> = n+1`, `<b^dag b> = n`.
    #[default]
    Quantum,
    /// Classical analogue: both orderings replaced by their mean (1/2 and n+1/2).
    Symmetrized,
}

/// Lorentzian spectrum of the amplitude noise, `Γ 2γ² / (γ² + ω²)`.
pub fn amplitude_noise_psd(noise: &LaserNoise, omega: f64) -> f64 {
    lorentzian(noise.gamma_eps, noise.gamma_eps_bw, omega)
}

/// Lorentzian spectrum of the frequency noise `phidot`.
pub fn phase_noise_psd(noise: &LaserNoise, omega: f64) -> f64 {
    lorentzian(noise.gamma_l, noise.gamma_phi_bw, omega)
}

fn lorentzian(strength: f64, bw: f64, omega: f64) -> f64 {
    if strength == 0.0 {
        return 0.0;
    }
    strength * 2.0 * bw * bw / (bw * bw + omega * omega)
}

/// Sparse correlation matrix: only the documented blocks are ever nonzero,
/// and every entry is real.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub basis: NoiseBasis,
    pub omega: f64,
    entries: Vec<(usize, usize, f64)>,
}

impl CorrelationMatrix {
    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries
            .iter()
            .filter(|(a, b, _)| *a == i && *b == j)
            .map(|(_, _, v)| *v)
            .sum()
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<num_complex::Complex64> {
        let n = self.basis.len();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += num_complex::Complex64::new(v, 0.0);
        }
        m
    }
}

pub fn correlation_matrix(params: &SystemParams, omega: f64, ordering: Ordering) -> CorrelationMatrix {
    let basis = NoiseBasis::for_params(params);
    let mut entries = Vec::with_capacity(24);
    let (vac_ad, vac_da) = match ordering {
        Ordering::Quantum => (1.0, 0.0),
        Ordering::Symmetrized => (0.5, 0.5),
    };
    let push_pair = |entries: &mut Vec<(usize, usize, f64)>, a: usize, ad: usize, up: f64, down: f64| {
        if up != 0.0 {
            entries.push((a, ad, up));
        }
        if down != 0.0 {
            entries.push((ad, a, down));
        }
    };
    for mode in 0..2 {
        for mirror in 1..=2 {
            let a = basis.a_in(mirror, mode, false);
            push_pair(&mut entries, a, a + 1, vac_ad, vac_da);
        }
        if let Some(a) = basis.a_loss(mode, false) {
            push_pair(&mut entries, a, a + 1, vac_ad, vac_da);
        }
    }
    for j in 0..2 {
        let n = params.mechanical[j].n_th;
        let (up, down) = match ordering {
            Ordering::Quantum => (n + 1.0, n),
            Ordering::Symmetrized => (n + 0.5, n + 0.5),
        };
        let b = basis.b_in(j, false);
        push_pair(&mut entries, b, b + 1, up, down);
    }
    for k in 0..2 {
        let laser = &params.noise.lasers[k];
        let se = amplitude_noise_psd(laser, omega);
        if se != 0.0 {
            entries.push((basis.eps(k), basis.eps(k), se));
        }
        let sp = phase_noise_psd(laser, omega);
        if sp != 0.0 {
            entries.push((basis.phidot(k), basis.phidot(k), sp));
        }
    }
    CorrelationMatrix { basis, omega, entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::units;
    use std::f64::consts::TAU;

    #[test]
    fn lorentzian_peak_and_half_width() {
        let n = LaserNoise::amplitude(3.0, 2.0e4);
        assert_eq!(amplitude_noise_psd(&n, 0.0), 6.0);
        assert!((amplitude_noise_psd(&n, 2.0e4) - 3.0).abs() < 1e-12);
        let p = LaserNoise::phase(1.5e10, TAU * 1e7);
        assert_eq!(phase_noise_psd(&p, 0.0), 3.0e10);
        assert_eq!(phase_noise_psd(&LaserNoise::default(), 123.0), 0.0);
    }

    #[test]
    fn calibrated_white_level_at_mechanical_frequency() {
        let n = LaserNoise::amplitude(6.7e12 / 2.0, TAU * 10e6);
        let s = amplitude_noise_psd(&n, TAU * 226.76e3);
        assert!((s / 6.7e12 - 1.0).abs() < 0.01);
        let p = LaserNoise::phase(3.1e10 / 2.0, TAU * 10e6);
        assert!((phase_noise_psd(&p, TAU * 231.9e3) / 3.1e10 - 1.0).abs() < 0.01);
    }

    #[test]
    fn basis_labels_unique_and_partners_involutive() {
        for loss in [false, true] {
            let b = NoiseBasis::new(loss);
            let labels = b.labels();
            assert_eq!(labels.len(), b.len());
            let mut sorted = labels.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), labels.len());
            for i in 0..b.len() {
                assert_eq!(b.partner(b.partner(i)), i);
            }
        }
        let b = NoiseBasis::new(false);
        assert_eq!(b.a_in(2, 1, false), 6);
        assert_eq!(b.b_in(1, true), 11);
        assert_eq!(b.eps(1), 13);
        assert_eq!(b.phidot(0), 14);
    }

    #[test]
    fn zero_temperature_mechanics_is_vacuum() {
        let mut p = presets::table1();
        for m in p.mechanical.iter_mut() {
            m.temperature = 0.0;
            m.n_th = units::thermal_occupancy(0.0, m.omega_m);
        }
        let c = correlation_matrix(&p, 1.0e6, Ordering::Quantum);
        let basis = c.basis;
        for j in 0..2 {
            let b = basis.b_in(j, false);
            assert_eq!(c.get(b, b + 1), 1.0);
            assert_eq!(c.get(b + 1, b), 0.0);
        }
    }

    #[test]
    fn room_temperature_thermal_entry() {
        let p = presets::table1();
        let c = correlation_matrix(&p, 0.0, Ordering::Quantum);
        let n = c.get(8 + 1, 8);
        let expect = units::K_B * 300.0 / (units::HBAR * TAU * 226_764.581);
        assert_eq!(n, expect);
        assert!((n / 2.75e7 - 1.0).abs() < 0.01);
        let be = units::bose_einstein(300.0, TAU * 226_764.581);
        assert!(((n - be) / be).abs() < 1e-7);
    }

    #[test]
    fn silent_lasers_leave_laser_rows_empty() {
        let p = presets::table1();
        let c = correlation_matrix(&p, 1.4e6, Ordering::Quantum);
        let dense = c.to_dense();
        for idx in 12..16 {
            for other in 0..c.basis.len() {
                assert_eq!(dense[(idx, other)].norm(), 0.0);
                assert_eq!(dense[(other, idx)].norm(), 0.0);
            }
        }
    }

    #[test]
    fn symmetrized_ordering_splits_evenly() {
        let p = presets::table1();
        let c = correlation_matrix(&p, 0.0, Ordering::Symmetrized);
        assert_eq!(c.get(0, 1), 0.5);
        assert_eq!(c.get(1, 0), 0.5);
        let n = p.mechanical[1].n_th;
        assert_eq!(c.get(10, 11), n + 0.5);
        assert_eq!(c.get(11, 10), n + 0.5);
    }
}
