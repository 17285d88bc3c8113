//! Heterodyne calibration of the injected pump noise.
//!
//! The AOM-modulated pump `sqrt(eps_a^2 + eps_m^2 cos(Omega t))` beats with the
//! probe `eps_b`; lock-in amplitudes at `Delta`, `Omega + Delta` and `Omega`
//! give `V_car`, `V_sb` and `V_Omega`, from which the modulation depth, the
//! detection factor and the equivalent white-noise levels follow.

pub mod lockin;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{rad_to_hz, HBAR};
pub use lockin::{lock_in, BandPass, DEFAULT_BANDWIDTH, DEFAULT_ORDER};

/// Hard limit on `eps_m / eps_a` for the small-modulation expansion.
pub const MAX_MODULATION_RATIO: f64 = 0.3;
const WARN_MODULATION_RATIO: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeatConfig {
    /// Pump carrier amplitude `sqrt(P / hbar omega_L)`.
    pub eps_a: f64,
    /// Probe amplitude.
    pub eps_b: f64,
    pub eps_m: f64,
    /// Modulation angular frequency, rad/s.
    pub omega_mod: f64,
    /// Pump-probe offset, rad/s.
    pub delta: f64,
    /// Record length, s.
    pub duration: f64,
    /// Samples per second.
    pub sample_rate: f64,
    /// Detection factor applied to the optical intensity.
    pub a_factor: f64,
    /// Standard deviation of additive white detector noise (detector units).
    pub noise_std: f64,
    pub seed: u64,
    /// Use `|eps_pu + eps_pr|^2` without the small-modulation expansion.
    pub exact: bool,
}

impl BeatConfig {
    /// Beat of a pump of power `p_pu` at `omega_l` with an equally strong probe.
    pub fn for_pump(p_pu: f64, omega_l: f64, eps_m: f64) -> Self {
        let eps_a = (p_pu / (HBAR * omega_l)).sqrt();
        Self {
            eps_a,
            eps_b: eps_a,
            eps_m,
            omega_mod: crate::units::hz_to_rad(1_000.0),
            delta: crate::units::hz_to_rad(5_000.0),
            duration: 2.0,
            sample_rate: 50_000.0,
            a_factor: 1.0,
            noise_std: 0.0,
            seed: 0,
            exact: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = [self.eps_a, self.omega_mod, self.delta, self.duration, self.sample_rate, self.a_factor];
        if pos.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid("beat", "amplitudes, frequencies, duration, sample rate and gain must be positive"));
        }
        if !(self.eps_b >= 0.0 && self.eps_m >= 0.0 && self.noise_std >= 0.0) {
            return Err(Error::invalid("beat", "eps_b, eps_m and noise_std must be non-negative"));
        }
        let ratio = self.eps_m / self.eps_a;
        if ratio >= MAX_MODULATION_RATIO {
            return Err(Error::invalid(
                "beat.eps_m",
                format!("eps_m/eps_a = {ratio:.3} breaks the small-modulation assumption (limit {MAX_MODULATION_RATIO})"),
            ));
        }
        let f_top = rad_to_hz(self.omega_mod + self.delta);
        if !(self.sample_rate > 4.0 * f_top) {
            return Err(Error::invalid("beat.sample_rate", "must exceed four times the highest beat line"));
        }
        Ok(())
    }

    /// Detector samples `a_factor * I(t) + noise`.
    pub fn sample(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let ratio = self.eps_m / self.eps_a;
        if ratio > WARN_MODULATION_RATIO {
            log::warn!("eps_m/eps_a = {ratio:.3}: small-modulation expansion is approximate");
        }
        let n = (self.duration * self.sample_rate).round() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let normal = Normal::new(0.0, self.noise_std.max(f64::MIN_POSITIVE)).expect("finite std");
        Ok((0..n)
            .map(|i| {
                let t = i as f64 / self.sample_rate;
                let i_t = if self.exact {
                    beat_intensity_exact(self, t)
                } else {
                    beat_intensity(self, t)
                };
                let noise = if self.noise_std > 0.0 { normal.sample(&mut rng) } else { 0.0 };
                self.a_factor * i_t + noise
            })
            .collect())
    }
}

/// Small-modulation expansion of the photodiode intensity.
pub fn beat_intensity(cfg: &BeatConfig, t: f64) -> f64 {
    let (ea, eb, em2) = (cfg.eps_a, cfg.eps_b, cfg.eps_m * cfg.eps_m);
    let (w, d) = (cfg.omega_mod, cfg.delta);
    let dc = ea * ea + eb * eb;
    dc + em2 * (w * t).cos()
        + 2.0 * ea * eb * (d * t).cos()
        + em2 * eb / (2.0 * ea) * (((w + d) * t).cos() + ((w - d) * t).cos())
}

/// `|eps_pu + eps_pr|^2` with the square-root modulation kept exactly.
pub fn beat_intensity_exact(cfg: &BeatConfig, t: f64) -> f64 {
    let (ea, eb, em2) = (cfg.eps_a, cfg.eps_b, cfg.eps_m * cfg.eps_m);
    let pump2 = ea * ea + em2 * (cfg.omega_mod * t).cos();
    pump2 + eb * eb + 2.0 * eb * pump2.sqrt() * (cfg.delta * t).cos()
}

/// Lock-in amplitudes `[V_car, V_sb, V_Omega]` of a sampled beat.
pub fn demodulate(cfg: &BeatConfig, samples: &[f64], bandwidth: f64) -> Result<[f64; 3]> {
    let fs = cfg.sample_rate;
    let f_car = rad_to_hz(cfg.delta);
    let f_sb = rad_to_hz(cfg.omega_mod + cfg.delta);
    let f_mod = rad_to_hz(cfg.omega_mod);
    Ok([
        lock_in(samples, fs, f_car, bandwidth, DEFAULT_ORDER)?,
        lock_in(samples, fs, f_sb, bandwidth, DEFAULT_ORDER)?,
        lock_in(samples, fs, f_mod, bandwidth, DEFAULT_ORDER)?,
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub v_car: f64,
    pub v_sb: f64,
    pub v_omega_m: f64,
    /// Modulation strength `eps_m^2`, photons/s.
    pub eps_m_sq: f64,
    /// Detection factor, detector units per photon/s.
    pub a_factor: f64,
    /// `Gamma_eps` such that the flat amplitude-noise level is `2 Gamma_eps = eps_m^2 / BW`.
    pub gamma_eps_equiv: f64,
    /// `Gamma_L` from a supplied frequency-modulation amplitude, if any.
    pub gamma_l_equiv: Option<f64>,
}

impl CalibrationResult {
    pub fn eps_m(&self) -> f64 {
        self.eps_m_sq.sqrt()
    }

    /// Flat amplitude-noise level `2 Gamma_eps`.
    pub fn amplitude_white_level(&self) -> f64 {
        2.0 * self.gamma_eps_equiv
    }
}

/// Calibration formulas for demodulated amplitudes of a pump of power `p_pu`
/// (W) at angular frequency `omega_l`, measured with bandwidth `bw`.
pub fn calibrate(v_car: f64, v_sb: f64, v_omega_m: f64, p_pu: f64, omega_l: f64, bw: f64) -> Result<CalibrationResult> {
    if !(v_car > 0.0) {
        return Err(Error::DivisionByZero("V_car"));
    }
    if !(v_sb > 0.0) {
        return Err(Error::DivisionByZero("V_sb"));
    }
    if !(bw > 0.0) {
        return Err(Error::DivisionByZero("BW"));
    }
    if !(p_pu > 0.0 && omega_l > 0.0) {
        return Err(Error::DivisionByZero("P_pu / hbar omega_L"));
    }
    if !(v_omega_m >= 0.0) {
        return Err(Error::invalid("V_Omega_m", "must be non-negative"));
    }
    let eps_a_sq = p_pu / (HBAR * omega_l);
    let eps_m_sq = 4.0 * eps_a_sq * v_sb / v_car;
    let a_factor = v_omega_m * v_car / (4.0 * eps_a_sq * v_sb);
    Ok(CalibrationResult {
        v_car,
        v_sb,
        v_omega_m,
        eps_m_sq,
        a_factor,
        gamma_eps_equiv: amplitude_white_level(eps_m_sq.sqrt(), bw) / 2.0,
        gamma_l_equiv: None,
    })
}

/// Flat amplitude-noise level `2 Gamma_eps = eps_m^2 / BW`.
pub fn amplitude_white_level(eps_m: f64, bw: f64) -> f64 {
    eps_m * eps_m / bw
}

/// Flat frequency-noise level `2 Gamma_L = phidot^2 / BW`.
pub fn phase_white_level(phidot: f64, bw: f64) -> f64 {
    phidot * phidot / bw
}

impl CalibrationResult {
    /// Adds the frequency-noise strength for a modulation amplitude `phidot`.
    pub fn with_phase_modulation(mut self, phidot: f64, bw: f64) -> Self {
        self.gamma_l_equiv = Some(phase_white_level(phidot, bw) / 2.0);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::units::optical_angular_frequency;

    fn cfg(eps_m: f64) -> BeatConfig {
        BeatConfig::for_pump(presets::PUMP_POWER, optical_angular_frequency(presets::WAVELENGTH), eps_m)
    }

    #[test]
    fn quoted_white_levels() {
        assert!((amplitude_white_level(8.2e6, 10.0) - 6.724e12).abs() < 1.0);
        assert!((phase_white_level(5.6e5, 10.0) - 3.136e10).abs() < 1e-3);
    }

    #[test]
    fn sideband_to_carrier_ratio() {
        let c = cfg(2e6);
        let ratio = (c.eps_m * c.eps_m * c.eps_b / (2.0 * c.eps_a)) / (2.0 * c.eps_a * c.eps_b);
        assert!((ratio - c.eps_m.powi(2) / (4.0 * c.eps_a.powi(2))).abs() < 1e-18);
    }

    #[test]
    fn small_modulation_form_tracks_exact_intensity() {
        let c = cfg(1e6);
        for i in 0..200 {
            let t = i as f64 * 3.7e-6;
            let a = beat_intensity(&c, t);
            let b = beat_intensity_exact(&c, t);
            let dc = c.eps_a.powi(2) + c.eps_b.powi(2);
            assert!((a - b).abs() <= 1e-5 * dc, "{a} vs {b}");
        }
    }

    #[test]
    fn lines_without_modulation_or_probe() {
        let mut c = cfg(0.0);
        c.exact = false;
        let x = c.sample().unwrap();
        let [v_car, v_sb, v_om] = demodulate(&c, &x, 19.0).unwrap();
        assert!(v_car > 0.0);
        assert!(v_sb < 1e-6 * v_car && v_om < 1e-6 * v_car);
        let mut c = cfg(1e6);
        c.eps_b = 0.0;
        let x = c.sample().unwrap();
        let [v_car, v_sb, v_om] = demodulate(&c, &x, 19.0).unwrap();
        assert!(v_om > 0.0);
        assert!(v_car < 1e-6 * v_om && v_sb < 1e-6 * v_om);
    }

    #[test]
    fn large_modulation_rejected() {
        let c = cfg(0.31 * cfg(0.0).eps_a);
        assert!(c.validate().is_err());
    }

    #[test]
    fn detection_factor_cancels() {
        let base = calibrate(2.0, 1e-3, 5e-2, 67e-6, 1.77e15, 10.0).unwrap();
        let scaled = calibrate(7.0 * 2.0, 7.0 * 1e-3, 7.0 * 5e-2, 67e-6, 1.77e15, 10.0).unwrap();
        assert!((scaled.eps_m_sq / base.eps_m_sq - 1.0).abs() < 1e-14);
        assert!((scaled.a_factor / base.a_factor - 7.0).abs() < 1e-12);
    }

    #[test]
    fn zero_voltages_are_guarded() {
        assert!(matches!(calibrate(0.0, 1.0, 1.0, 1.0, 1.0, 1.0), Err(Error::DivisionByZero("V_car"))));
        assert!(matches!(calibrate(1.0, 0.0, 1.0, 1.0, 1.0, 1.0), Err(Error::DivisionByZero("V_sb"))));
    }
}
