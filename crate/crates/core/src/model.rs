//! Physical description of the two-membrane, two-mode cavity.
//!
//! Mode index 0 is the probe (locked on resonance, read out in reflection)
//! and index 1 is the pump (detuned, carries the injected noise, read out in
//! transmission). Membrane indices are 0 and 1. Couplings are stored as
//! `g0[membrane][mode]`.
//!
//! All rates are angular frequencies (rad/s).

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{self, HBAR};

pub const PROBE: usize = 0;
pub const PUMP: usize = 1;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalMode {
    /// Mean laser angular frequency.
    pub omega_l: f64,
    /// Bare detuning `omega_c - omega_L`.
    pub detuning0: f64,
    /// Input-mirror amplitude decay rate.
    pub kappa1: f64,
    /// Output-mirror amplitude decay rate.
    pub kappa2: f64,
    /// Internal loss rate.
    pub kappa_l: f64,
    /// Laser power, W.
    pub power: f64,
}

impl OpticalMode {
    pub fn new(omega_l: f64, detuning0: f64, kappa1: f64, kappa2: f64, kappa_l: f64, power: f64) -> Self {
        Self {
            omega_l,
            detuning0,
            kappa1,
            kappa2,
            kappa_l,
            power,
        }
    }

    /// Splits a total decay rate evenly between the two mirrors, no extra loss.
    pub fn with_total_kappa(omega_l: f64, detuning0: f64, kappa: f64, power: f64) -> Self {
        Self::new(omega_l, detuning0, kappa / 2.0, kappa / 2.0, 0.0, power)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa1 + self.kappa2 + self.kappa_l
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_l + self.detuning0
    }

    /// Mirror decay rate for port 1 (input) or 2 (output).
    pub fn port_kappa(&self, mirror: usize) -> f64 {
        match mirror {
            1 => self.kappa1,
            2 => self.kappa2,
            _ => panic!("mirror index must be 1 or 2, got {mirror}"),
        }
    }

    /// Mean drive amplitude `sqrt(P kappa1 / hbar omega_L)`, real by choice of phase reference.
    pub fn drive_mean(&self) -> f64 {
        if self.power == 0.0 {
            return 0.0;
        }
        (self.power * self.kappa1 / (HBAR * self.omega_l)).sqrt()
    }

    fn validate(&self, key: &str) -> Result<()> {
        let finite = [self.omega_l, self.detuning0, self.kappa1, self.kappa2, self.kappa_l, self.power]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid(key, "non-finite value"));
        }
        if self.kappa1 < 0.0 || self.kappa2 < 0.0 || self.kappa_l < 0.0 {
            return Err(Error::invalid(key, "decay rates must be non-negative"));
        }
        if self.kappa() <= 0.0 {
            return Err(Error::invalid(key, "total decay rate must be positive"));
        }
        if self.power < 0.0 {
            return Err(Error::invalid(key, "laser power must be non-negative"));
        }
        if self.power > 0.0 && self.omega_l <= 0.0 {
            return Err(Error::invalid(key, "laser frequency must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanicalMode {
    pub omega_m: f64,
    pub gamma_m: f64,
    /// Effective mass in kg; carried along, never used in the dynamics.
    pub mass_eff: f64,
    pub n_th: f64,
    pub temperature: f64,
}

impl MechanicalMode {
    /// Occupancy from the high-temperature form `k_B T / hbar omega_m`.
    pub fn from_temperature(omega_m: f64, gamma_m: f64, mass_eff: f64, temperature: f64) -> Self {
        Self {
            omega_m,
            gamma_m,
            mass_eff,
            n_th: units::thermal_occupancy(temperature, omega_m),
            temperature,
        }
    }

    pub fn with_occupancy(omega_m: f64, gamma_m: f64, n_th: f64) -> Self {
        Self {
            omega_m,
            gamma_m,
            mass_eff: 0.0,
            n_th,
            temperature: 0.0,
        }
    }

    fn validate(&self, key: &str) -> Result<()> {
        if !(self.omega_m > 0.0 && self.omega_m.is_finite()) {
            return Err(Error::invalid(key, "resonance frequency must be positive"));
        }
        if !(self.gamma_m > 0.0 && self.gamma_m.is_finite()) {
            return Err(Error::invalid(key, "damping rate must be positive"));
        }
        if !(self.n_th >= 0.0 && self.n_th.is_finite()) {
            return Err(Error::invalid(key, "thermal occupancy must be non-negative"));
        }
        if self.gamma_m > self.omega_m / 10.0 {
            log::warn!(
                "{key}: gamma_m = {:.3e} exceeds omega_m/10; the high-Q static displacement degrades",
                self.gamma_m
            );
        }
        Ok(())
    }
}

/// Single-photon couplings `g0[membrane][mode]`, rad/s. Signs are physical.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CouplingMatrix {
    pub g0: [[f64; 2]; 2],
}

impl CouplingMatrix {
    pub fn new(g0: [[f64; 2]; 2]) -> Self {
        Self { g0 }
    }

    pub fn get(&self, membrane: usize, mode: usize) -> f64 {
        self.g0[membrane][mode]
    }

    pub fn is_zero(&self) -> bool {
        self.g0.iter().flatten().all(|&g| g == 0.0)
    }
}

/// Lorentzian amplitude and frequency noise of one laser.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LaserNoise {
    /// Dimensionless amplitude-noise strength.
    pub gamma_eps: f64,
    /// Amplitude-noise bandwidth, rad/s.
    pub gamma_eps_bw: f64,
    /// Frequency-noise strength (laser linewidth), rad/s.
    pub gamma_l: f64,
    /// Frequency-noise bandwidth, rad/s.
    pub gamma_phi_bw: f64,
}

impl LaserNoise {
    pub fn amplitude(strength: f64, bandwidth: f64) -> Self {
        Self {
            gamma_eps: strength,
            gamma_eps_bw: bandwidth,
            ..Self::default()
        }
    }

    pub fn phase(strength: f64, bandwidth: f64) -> Self {
        Self {
            gamma_l: strength,
            gamma_phi_bw: bandwidth,
            ..Self::default()
        }
    }

    fn validate(&self, key: &str) -> Result<()> {
        let vals = [self.gamma_eps, self.gamma_eps_bw, self.gamma_l, self.gamma_phi_bw];
        if vals.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid(key, "noise strengths and bandwidths must be finite and >= 0"));
        }
        if self.gamma_eps > 0.0 && self.gamma_eps_bw <= 0.0 {
            return Err(Error::invalid(key, "amplitude noise needs a positive bandwidth"));
        }
        if self.gamma_l > 0.0 && self.gamma_phi_bw <= 0.0 {
            return Err(Error::invalid(key, "phase noise needs a positive bandwidth"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub lasers: [LaserNoise; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub optical: [OpticalMode; 2],
    pub mechanical: [MechanicalMode; 2],
    pub couplings: CouplingMatrix,
    pub noise: NoiseSpec,
    /// Local-oscillator angle of the detected quadrature, rad.
    pub lo_phase: f64,
    /// Adds a vacuum input at rate `kappa_l` for each optical mode.
    pub include_loss_port: bool,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        for (k, m) in self.optical.iter().enumerate() {
            m.validate(&format!("optical[{k}]"))?;
        }
        for (j, m) in self.mechanical.iter().enumerate() {
            m.validate(&format!("mechanical[{j}]"))?;
        }
        for (k, n) in self.noise.lasers.iter().enumerate() {
            n.validate(&format!("noise[{k}]"))?;
        }
        if self.couplings.g0.iter().flatten().any(|g| !g.is_finite()) {
            return Err(Error::invalid("couplings", "non-finite coupling"));
        }
        if !self.lo_phase.is_finite() {
            return Err(Error::invalid("lo_phase", "non-finite"));
        }
        Ok(())
    }

    pub fn with_couplings(&self, g0: [[f64; 2]; 2]) -> Self {
        let mut p = self.clone();
        p.couplings = CouplingMatrix::new(g0);
        p
    }
}

/// Optical bare susceptibility `1 / (kappa/2 - i (omega - detuning))`.
#[inline]
pub fn chi_c(kappa: f64, detuning: f64, omega: f64) -> C64 {
    C64::new(kappa / 2.0, -(omega - detuning)).inv()
}

/// Mechanical bare susceptibility `1 / (gamma/2 - i (omega - omega_m))`.
#[inline]
pub fn chi_m(gamma: f64, omega_m: f64, omega: f64) -> C64 {
    C64::new(gamma / 2.0, -(omega - omega_m)).inv()
}

impl MechanicalMode {
    pub fn chi(&self, omega: f64) -> C64 {
        chi_m(self.gamma_m, self.omega_m, omega)
    }
}

/// Self-consistent fixed point of the driven system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub alpha: [C64; 2],
    pub xbar: [f64; 2],
    pub detuning: [f64; 2],
    /// Effective couplings `g[membrane][mode] = g0 * alpha[mode]`.
    pub g_eff: [[C64; 2]; 2],
    pub kappa: [f64; 2],
}

impl SteadyState {
    fn from_xbar(params: &SystemParams, xbar: [f64; 2]) -> Self {
        let g0 = &params.couplings.g0;
        let mut alpha = [C64::new(0.0, 0.0); 2];
        let mut detuning = [0.0; 2];
        let mut kappa = [0.0; 2];
        for k in 0..2 {
            let mode = &params.optical[k];
            detuning[k] = mode.detuning0 - (0..2).map(|j| g0[j][k] * xbar[j]).sum::<f64>();
            kappa[k] = mode.kappa();
            alpha[k] = mode.drive_mean() / C64::new(kappa[k] / 2.0, detuning[k]);
        }
        let mut g_eff = [[C64::new(0.0, 0.0); 2]; 2];
        for j in 0..2 {
            for k in 0..2 {
                g_eff[j][k] = alpha[k] * g0[j][k];
            }
        }
        Self {
            alpha,
            xbar,
            detuning,
            g_eff,
            kappa,
        }
    }

    pub fn intracavity_photons(&self, mode: usize) -> f64 {
        self.alpha[mode].norm_sqr()
    }

    pub fn chi_c(&self, mode: usize, omega: f64) -> C64 {
        chi_c(self.kappa[mode], self.detuning[mode], omega)
    }

    /// Optical self-energy `i |alpha|^2 [chi_c*(-omega) - chi_c(omega)]`.
    pub fn sigma(&self, mode: usize, omega: f64) -> C64 {
        let n = self.intracavity_photons(mode);
        I * n * (self.chi_c(mode, -omega).conj() - self.chi_c(mode, omega))
    }

    /// Relative residuals of the amplitude, displacement and detuning equations.
    pub fn residuals(&self, params: &SystemParams) -> [f64; 3] {
        let g0 = &params.couplings.g0;
        let mut r_alpha: f64 = 0.0;
        let mut r_delta: f64 = 0.0;
        for k in 0..2 {
            let mode = &params.optical[k];
            let expect = mode.drive_mean() / C64::new(mode.kappa() / 2.0, self.detuning[k]);
            let scale = expect.norm().max(f64::MIN_POSITIVE);
            r_alpha = r_alpha.max((self.alpha[k] - expect).norm() / scale);
            let d = mode.detuning0 - (0..2).map(|j| g0[j][k] * self.xbar[j]).sum::<f64>();
            r_delta = r_delta.max((self.detuning[k] - d).abs() / d.abs().max(mode.kappa()));
        }
        let mut r_x: f64 = 0.0;
        for j in 0..2 {
            let x = displacement(params, j, &self.alpha);
            r_x = r_x.max((self.xbar[j] - x).abs() / x.abs().max(f64::MIN_POSITIVE));
        }
        [r_alpha, r_x, r_delta]
    }
}

fn displacement(params: &SystemParams, j: usize, alpha: &[C64; 2]) -> f64 {
    let g0 = &params.couplings.g0;
    2.0 * (0..2).map(|k| g0[j][k] * alpha[k].norm_sqr()).sum::<f64>() / params.mechanical[j].omega_m
}

const SS_TOL: f64 = 1e-12;
const SS_MAX_ITER: usize = 20_000;

/// Solves the coupled amplitude / displacement / detuning fixed point.
///
/// Damped fixed-point iteration on the static displacements, started from
/// the bare detuning and from +-20 % perturbations of it. Distinct limits are
/// reported as [`Error::Bistable`].
pub fn solve_steady_state(params: &SystemParams) -> Result<SteadyState> {
    params.validate()?;
    if params.couplings.is_zero() {
        return Ok(SteadyState::from_xbar(params, [0.0; 2]));
    }

    let mut converged: Vec<[f64; 2]> = Vec::new();
    let mut best_iters = 0;
    for scale in [1.0, 1.2, 0.8] {
        // Seed: displacement produced by the (scaled) bare detuning.
        let mut seed_params = params.clone();
        for m in seed_params.optical.iter_mut() {
            m.detuning0 *= scale;
        }
        let seed_alpha = SteadyState::from_xbar(&seed_params, [0.0; 2]).alpha;
        let x0 = [displacement(params, 0, &seed_alpha), displacement(params, 1, &seed_alpha)];
        match iterate_fixed_point(params, x0) {
            Ok(x) => {
                let dup = converged.iter().any(|c| {
                    (0..2).all(|j| (c[j] - x[j]).abs() <= 1e-8 * (c[j].abs().max(x[j].abs()).max(1e-300)))
                });
                if !dup {
                    converged.push(x);
                }
            }
            Err(iters) => best_iters = best_iters.max(iters),
        }
    }

    match converged.len() {
        0 => Err(Error::Convergence {
            iterations: best_iters,
            branches: converged,
        }),
        1 => {
            let ss = SteadyState::from_xbar(params, converged[0]);
            let probe_detuning = ss.detuning[PROBE];
            if probe_detuning.abs() > 0.01 * params.optical[PROBE].kappa() / 2.0 {
                log::warn!("probe effective detuning {probe_detuning:.3e} rad/s is not zero");
            }
            Ok(ss)
        }
        _ => Err(Error::Bistable { branches: converged }),
    }
}

fn iterate_fixed_point(params: &SystemParams, mut x: [f64; 2]) -> std::result::Result<[f64; 2], usize> {
    let map = |x: [f64; 2]| {
        let alpha = SteadyState::from_xbar(params, x).alpha;
        [displacement(params, 0, &alpha), displacement(params, 1, &alpha)]
    };
    let mut damping: f64 = 1.0;
    let mut prev_step = f64::INFINITY;
    for iter in 0..SS_MAX_ITER {
        let fx = map(x);
        let step = [fx[0] - x[0], fx[1] - x[1]];
        let size = step[0].abs().max(step[1].abs());
        let scale = fx[0].abs().max(fx[1].abs()).max(f64::MIN_POSITIVE);
        if size <= SS_TOL * scale {
            return Ok(fx);
        }
        if size > prev_step {
            damping = (damping * 0.5).max(1e-4);
        }
        prev_step = size;
        x = [x[0] + damping * step[0], x[1] + damping * step[1]];
        if !(x[0].is_finite() && x[1].is_finite()) {
            return Err(iter);
        }
    }
    Err(SS_MAX_ITER)
}

/// Dressed mechanical susceptibility `[chi_m^-1 + i sum_k g0_jk^2 sigma_k]^-1`.
pub fn chi_m_dressed(j: usize, steady: &SteadyState, params: &SystemParams, omega: f64) -> Result<C64> {
    let inv = dressed_inverse(j, steady, params, omega);
    invert_checked(inv, j, params, omega)
}

fn dressed_inverse(j: usize, steady: &SteadyState, params: &SystemParams, omega: f64) -> C64 {
    let bare = params.mechanical[j].chi(omega).inv();
    let self_energy: C64 = (0..2)
        .map(|k| params.couplings.g0[j][k].powi(2) * steady.sigma(k, omega))
        .sum();
    bare + I * self_energy
}

fn invert_checked(inv: C64, j: usize, params: &SystemParams, omega: f64) -> Result<C64> {
    let scale = params.mechanical[j].gamma_m.max(omega.abs()).max(1.0);
    if inv.norm() <= f64::EPSILON * scale {
        return Err(Error::Pole { membrane: j, omega });
    }
    Ok(inv.inv())
}

/// Which susceptibility of the other membrane enters the RWA cross term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CrossSusceptibility {
    #[default]
    Dressed,
    Bare,
}

/// Effective RWA susceptibility of membrane `j`, including the exchange
/// through the other membrane `3 - j`.
pub fn chi_m_rwa(
    j: usize,
    steady: &SteadyState,
    params: &SystemParams,
    omega: f64,
    cross: CrossSusceptibility,
) -> Result<C64> {
    let other = 1 - j;
    let g0 = &params.couplings.g0;
    let chi_other = match cross {
        CrossSusceptibility::Dressed => chi_m_dressed(other, steady, params, omega)?,
        CrossSusceptibility::Bare => params.mechanical[other].chi(omega),
    };
    let sigma = [steady.sigma(0, omega), steady.sigma(1, omega)];
    let mut exchange = C64::new(0.0, 0.0);
    for k in 0..2 {
        for kp in 0..2 {
            exchange += g0[j][k] * g0[j][kp] * sigma[k] * sigma[kp] * g0[other][k] * g0[other][kp];
        }
    }
    let inv = dressed_inverse(j, steady, params, omega) + exchange * chi_other;
    invert_checked(inv, j, params, omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use std::f64::consts::TAU;

    #[test]
    fn chi_c_on_resonance_is_real() {
        let kappa = TAU * 119e3;
        let delta = TAU * 240e3;
        let c = chi_c(kappa, delta, delta);
        assert!((c.re - 2.0 / kappa).abs() < 1e-20);
        assert_eq!(c.im, 0.0);
    }

    #[test]
    fn chi_c_table_value_at_zero_frequency() {
        let kappa = TAU * 119e3;
        let delta = TAU * 240e3;
        let expect = C64::new(kappa / 2.0, delta).inv();
        let got = chi_c(kappa, delta, 0.0);
        assert!((got - expect).norm() / expect.norm() < 1e-15);
        assert!(chi_c(kappa, delta, 1e12).norm() < 1e-11);
    }

    #[test]
    fn chi_m_peak_and_half_width() {
        let wm = TAU * 226_764.581;
        let gm = TAU * 1.44;
        let peak = chi_m(gm, wm, wm);
        assert!((peak.norm() - 1.0 / (std::f64::consts::PI * 1.44)).abs() < 1e-12);
        assert!((peak.re - 2.0 / gm).abs() < 1e-15);
        for side in [-1.0, 1.0] {
            let half = chi_m(gm, wm, wm + side * gm / 2.0).norm_sqr();
            assert!((half / peak.norm_sqr() - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn susceptibility_mirror_symmetry() {
        let kappa = TAU * 119e3;
        for &delta in &[TAU * 240e3, -TAU * 50e3, 0.0] {
            for &w in &[-3e6, -1e5, 0.0, 7.7e4, 1.4e6] {
                let lhs = chi_c(kappa, delta, -w).conj();
                let rhs = chi_c(kappa, -delta, w);
                assert!((lhs - rhs).norm() <= 1e-15 * lhs.norm());
                let lm = chi_m(9.0, 1.4e6, -w).conj();
                let rm = chi_m(9.0, -1.4e6, w);
                assert!((lm - rm).norm() <= 1e-15 * lm.norm());
            }
        }
    }

    #[test]
    fn decoupled_steady_state_is_one_step() {
        let p = presets::table1().with_couplings([[0.0; 2]; 2]);
        let ss = solve_steady_state(&p).unwrap();
        assert_eq!(ss.xbar, [0.0, 0.0]);
        for k in 0..2 {
            assert_eq!(ss.detuning[k], p.optical[k].detuning0);
            let expect = p.optical[k].drive_mean() / C64::new(p.optical[k].kappa() / 2.0, p.optical[k].detuning0);
            assert_eq!(ss.alpha[k], expect);
        }
    }

    #[test]
    fn undriven_cavity_is_empty() {
        let mut p = presets::fig4c();
        for m in p.optical.iter_mut() {
            m.power = 0.0;
        }
        let ss = solve_steady_state(&p).unwrap();
        assert_eq!(ss.alpha, [C64::new(0.0, 0.0); 2]);
        assert_eq!(ss.xbar, [0.0, 0.0]);
    }

    #[test]
    fn table1_steady_state_residuals() {
        let p = presets::fig4c();
        let ss = solve_steady_state(&p).unwrap();
        assert!(ss.intracavity_photons(PUMP) > 1e6);
        for r in ss.residuals(&p) {
            assert!(r < 1e-10, "residual {r}");
        }
    }

    #[test]
    fn dressed_equals_bare_without_coupling() {
        let p = presets::table1().with_couplings([[0.0; 2]; 2]);
        let ss = solve_steady_state(&p).unwrap();
        for j in 0..2 {
            for dw in [-1e3, 0.0, 37.0, 5e4] {
                let w = p.mechanical[j].omega_m + dw;
                let bare = p.mechanical[j].chi(w);
                let dressed = chi_m_dressed(j, &ss, &p, w).unwrap();
                assert!((dressed - bare).norm() <= 1e-14 * bare.norm());
                let rwa = chi_m_rwa(j, &ss, &p, w, CrossSusceptibility::Dressed).unwrap();
                assert!((rwa - bare).norm() <= 1e-14 * bare.norm());
            }
        }
    }

    #[test]
    fn rwa_reduces_to_dressed_when_other_membrane_decoupled() {
        let p = presets::fig4c().with_couplings([[0.0, TAU * 0.13], [0.0, 0.0]]);
        let ss = solve_steady_state(&p).unwrap();
        let w = p.mechanical[0].omega_m + 3.0;
        let a = chi_m_rwa(0, &ss, &p, w, CrossSusceptibility::Dressed).unwrap();
        let b = chi_m_dressed(0, &ss, &p, w).unwrap();
        assert!((a - b).norm() <= 1e-14 * b.norm());
    }

    #[test]
    fn optical_damping_broadens_red_detuned_membranes() {
        let p = presets::fig4c();
        let ss = solve_steady_state(&p).unwrap();
        for j in 0..2 {
            let wm = p.mechanical[j].omega_m;
            let inv = chi_m_dressed(j, &ss, &p, wm).unwrap().inv();
            assert!(inv.re >= p.mechanical[j].gamma_m / 2.0);
        }
    }

    #[test]
    fn sigma_vanishes_without_field_and_matches_definition() {
        let p = presets::fig4c();
        let ss = solve_steady_state(&p).unwrap();
        let w = p.mechanical[0].omega_m;
        for k in 0..2 {
            let n = ss.alpha[k].norm_sqr();
            let lower = C64::new(ss.kappa[k] / 2.0, -(-w - ss.detuning[k])).inv().conj();
            let upper = C64::new(ss.kappa[k] / 2.0, -(w - ss.detuning[k])).inv();
            let expect = I * n * (lower - upper);
            assert!((ss.sigma(k, w) - expect).norm() <= 1e-14 * expect.norm().max(1e-300));
        }
        let mut empty = ss.clone();
        empty.alpha = [C64::new(0.0, 0.0); 2];
        assert_eq!(empty.sigma(1, w), C64::new(0.0, 0.0));
    }

    #[test]
    fn zero_detuning_self_energy_cancels() {
        let p = presets::fig4c();
        let mut ss = solve_steady_state(&p).unwrap();
        ss.detuning[0] = 0.0;
        for w in [-2e6, 0.0, 1.0e5, 1.42e6] {
            assert!(ss.sigma(0, w).norm() <= 1e-12 * ss.alpha[0].norm_sqr() / ss.kappa[0]);
        }
    }
}
