//! TOML run configuration.
//!
//! Every physical quantity carries its unit in the key (`_hz`, `_rad_s`,
//! `_w`, `_k`, `_kg`, `_m`, `_s`, `_rad`); frequencies and rates given in Hz
//! are multiplied by 2π on ingestion. A document starts from a named preset
//! and overrides individual fields. Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calibration::{BeatConfig, DEFAULT_BANDWIDTH};
use crate::error::{Error, Result};
use crate::fitting::CouplingFitOptions;
use crate::model::{LaserNoise, MechanicalMode, SystemParams, PROBE, PUMP};
use crate::noise::Ordering;
use crate::oracle::SimConfig;
use crate::presets;
use crate::spectra::{grid, DetectionChain, Quadrature, QuadratureSelector, Sidedness};
use crate::units::{hz_to_rad, optical_angular_frequency};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    /// `table1`, `fig4c`, `fig5` or `cancellation`.
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub cavity: CavitySection,
    #[serde(default)]
    pub probe: LaserSection,
    #[serde(default)]
    pub pump: LaserSection,
    #[serde(default)]
    pub membrane: Vec<MembraneSection>,
    #[serde(default)]
    pub couplings: CouplingSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub detection: DetectionSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub fit: FitSection,
    #[serde(default)]
    pub calibration: CalibrationSection,
    #[serde(default)]
    pub cancellation: CancellationSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySection {
    pub wavelength_m: Option<f64>,
    /// Total linewidth; split evenly between the mirrors unless the split is given.
    pub kappa_hz: Option<f64>,
    pub kappa1_hz: Option<f64>,
    pub kappa2_hz: Option<f64>,
    pub kappa_l_hz: Option<f64>,
    pub include_loss_port: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserSection {
    pub power_w: Option<f64>,
    /// Bare detuning `omega_c - omega_L`.
    pub detuning_hz: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MembraneSection {
    pub freq_hz: Option<f64>,
    pub damping_hz: Option<f64>,
    pub mass_kg: Option<f64>,
    pub temperature_k: Option<f64>,
    /// Overrides the occupancy derived from the temperature.
    pub n_th: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    /// `g0[membrane]` to the pump mode.
    pub pump_hz: Option<[f64; 2]>,
    /// `g0[membrane]` to the probe mode; defaults to the pump values.
    pub probe_hz: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub probe: Option<LaserNoiseSection>,
    pub pump: Option<LaserNoiseSection>,
}

/// Lorentzian amplitude and frequency noise. When a section is present it
/// replaces the preset noise of that laser entirely.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserNoiseSection {
    /// Dimensionless `Γ_ε`.
    pub amplitude_strength: Option<f64>,
    /// Low-frequency level `2 Γ_ε`; alternative to `amplitude_strength`.
    pub amplitude_white_level: Option<f64>,
    pub amplitude_bandwidth_hz: Option<f64>,
    /// `Γ_L`, rad/s.
    pub phase_strength_rad_s: Option<f64>,
    /// Low-frequency level `2 Γ_L`, rad/s; alternative to `phase_strength_rad_s`.
    pub phase_white_level_rad_s: Option<f64>,
    pub phase_bandwidth_hz: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSection {
    /// `x` or `y`.
    pub quadrature: Option<String>,
    /// `t2` (pump transmission) or `r1` (probe reflection).
    pub port: Option<String>,
    pub lo_phase_rad: Option<f64>,
    /// `two` or `one`.
    pub sided: Option<String>,
    /// `quantum` or `symmetrized`.
    pub ordering: Option<String>,
    pub a_factor: Option<f64>,
    pub shot_floor: Option<f64>,
    pub electronic_floor: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub fmin_hz: Option<f64>,
    pub fmax_hz: Option<f64>,
    pub points: Option<usize>,
    /// Adds dense points around each mechanical resonance.
    pub refine: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub name: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub dt_s: Option<f64>,
    pub duration_s: Option<f64>,
    pub burn_in_s: Option<f64>,
    pub segment: Option<usize>,
    pub overlap: Option<f64>,
    pub integrator: Option<String>,
    pub seed: Option<u64>,
    pub record: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub starts: Option<usize>,
    pub seed: Option<u64>,
    pub fit_scale: Option<bool>,
    pub tie_probe: Option<bool>,
    pub start_min_hz: Option<f64>,
    pub start_max_hz: Option<f64>,
    /// CSV (`freq_hz,psd_value`) to fit; synthetic data from the model otherwise.
    pub data: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSection {
    /// Modulation amplitude, sqrt(photons/s).
    pub eps_m: Option<f64>,
    pub modulation_hz: Option<f64>,
    pub offset_hz: Option<f64>,
    pub duration_s: Option<f64>,
    pub sample_rate_hz: Option<f64>,
    pub a_factor: Option<f64>,
    pub noise_std: Option<f64>,
    pub seed: Option<u64>,
    pub bandwidth_hz: Option<f64>,
    /// CSV of `v_car,v_sb,v_omega_m` rows to calibrate instead of a synthetic beat.
    pub data: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CancellationSection {
    /// Seed intensities `eps_m^2`, photons/s.
    pub eps_m_sq: Option<Vec<f64>>,
    pub measurement_bw_hz: Option<f64>,
}

fn cfg_err(path: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_string(),
        reason: reason.into(),
    }
}

fn positive(path: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(cfg_err(path, format!("must be positive and finite, got {v}")))
    }
}

fn non_negative(path: &str, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(cfg_err(path, format!("must be non-negative and finite, got {v}")))
    }
}

/// The detected port and quadrature, resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub selector: QuadratureSelector,
    pub sided: Sidedness,
    pub ordering: Ordering,
    pub chain: DetectionChain,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| cfg_err("<document>", e.to_string()))?;
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            cfg_err(&path, e.into_inner().message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Schema checks and resolution of every block, before any computation.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(cfg_err(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        let params = self.system_params()?;
        params.validate().map_err(|e| cfg_err("<system>", e.to_string()))?;
        self.detection()?;
        self.grid()?;
        self.solver_name();
        self.sim_config()?;
        self.fit_options()?;
        self.beat_config()?;
        self.cancellation_levels()?;
        Ok(())
    }

    fn base(&self) -> Result<SystemParams> {
        match self.preset.as_deref().unwrap_or("table1") {
            "table1" => Ok(presets::table1()),
            "fig4c" => Ok(presets::fig4c()),
            "fig5" => Ok(presets::fig5()),
            "cancellation" => Ok(presets::cancellation(self.cancellation_levels()?[0])),
            other => Err(cfg_err(
                "preset",
                format!("unknown preset `{other}`; known: table1, fig4c, fig5, cancellation"),
            )),
        }
    }

    pub fn system_params(&self) -> Result<SystemParams> {
        let mut p = self.base()?;
        let c = &self.cavity;
        if let Some(wl) = c.wavelength_m {
            let w = optical_angular_frequency(positive("cavity.wavelength_m", wl)?);
            for m in &mut p.optical {
                m.omega_l = w;
            }
        }
        if let Some(k) = c.kappa_hz {
            let k = hz_to_rad(positive("cavity.kappa_hz", k)?);
            for m in &mut p.optical {
                m.kappa1 = k / 2.0;
                m.kappa2 = k / 2.0;
                m.kappa_l = 0.0;
            }
        }
        for (key, v, slot) in [
            ("cavity.kappa1_hz", c.kappa1_hz, 0),
            ("cavity.kappa2_hz", c.kappa2_hz, 1),
            ("cavity.kappa_l_hz", c.kappa_l_hz, 2),
        ] {
            if let Some(v) = v {
                let v = hz_to_rad(non_negative(key, v)?);
                for m in &mut p.optical {
                    match slot {
                        0 => m.kappa1 = v,
                        1 => m.kappa2 = v,
                        _ => m.kappa_l = v,
                    }
                }
            }
        }
        if let Some(b) = c.include_loss_port {
            p.include_loss_port = b;
        }
        for (name, sec, k) in [("probe", &self.probe, PROBE), ("pump", &self.pump, PUMP)] {
            if let Some(w) = sec.power_w {
                p.optical[k].power = non_negative(&format!("{name}.power_w"), w)?;
            }
            if let Some(d) = sec.detuning_hz {
                if !d.is_finite() {
                    return Err(cfg_err(&format!("{name}.detuning_hz"), "must be finite"));
                }
                p.optical[k].detuning0 = hz_to_rad(d);
            }
        }
        if !self.membrane.is_empty() && self.membrane.len() != 2 {
            return Err(cfg_err("membrane", format!("expected 2 entries, got {}", self.membrane.len())));
        }
        for (j, m) in self.membrane.iter().enumerate() {
            let key = |f: &str| format!("membrane[{j}].{f}");
            let cur = p.mechanical[j];
            let omega_m = match m.freq_hz {
                Some(f) => hz_to_rad(positive(&key("freq_hz"), f)?),
                None => cur.omega_m,
            };
            let gamma_m = match m.damping_hz {
                Some(g) => hz_to_rad(positive(&key("damping_hz"), g)?),
                None => cur.gamma_m,
            };
            let mass = match m.mass_kg {
                Some(v) => positive(&key("mass_kg"), v)?,
                None => cur.mass_eff,
            };
            let temperature = match m.temperature_k {
                Some(t) => non_negative(&key("temperature_k"), t)?,
                None => cur.temperature,
            };
            let mut mode = if temperature > 0.0 {
                MechanicalMode::from_temperature(omega_m, gamma_m, mass, temperature)
            } else {
                MechanicalMode {
                    mass_eff: mass,
                    ..MechanicalMode::with_occupancy(omega_m, gamma_m, cur.n_th)
                }
            };
            if let Some(n) = m.n_th {
                mode.n_th = non_negative(&key("n_th"), n)?;
            }
            p.mechanical[j] = mode;
        }
        if let Some(g) = self.couplings.pump_hz {
            for j in 0..2 {
                p.couplings.g0[j][PUMP] = hz_to_rad(g[j]);
                p.couplings.g0[j][PROBE] = hz_to_rad(g[j]);
            }
        }
        if let Some(g) = self.couplings.probe_hz {
            for j in 0..2 {
                p.couplings.g0[j][PROBE] = hz_to_rad(g[j]);
            }
        }
        if self
            .couplings
            .pump_hz
            .iter()
            .chain(&self.couplings.probe_hz)
            .flatten()
            .any(|g| !g.is_finite())
        {
            return Err(cfg_err("couplings", "couplings must be finite"));
        }
        for (name, sec, k) in [("noise.probe", &self.noise.probe, PROBE), ("noise.pump", &self.noise.pump, PUMP)] {
            if let Some(s) = sec {
                p.noise.lasers[k] = s.resolve(name)?;
            }
        }
        if let Some(phi) = self.detection.lo_phase_rad {
            p.lo_phase = phi;
        }
        Ok(p)
    }

    pub fn detection(&self) -> Result<Detection> {
        let d = &self.detection;
        let lo = d.lo_phase_rad.unwrap_or(0.0);
        if !lo.is_finite() {
            return Err(cfg_err("detection.lo_phase_rad", "must be finite"));
        }
        let default_port = if self.preset.as_deref() == Some("cancellation") { "r1" } else { "t2" };
        let port = d.port.as_deref().unwrap_or(default_port);
        let mut sel = match port {
            "t2" => QuadratureSelector::transmission_x(lo),
            "r1" => QuadratureSelector::reflection_y(lo),
            other => return Err(cfg_err("detection.port", format!("expected t2 or r1, got `{other}`"))),
        };
        let default_q = if port == "r1" { "y" } else { "x" };
        sel.quadrature = match d.quadrature.as_deref().unwrap_or(default_q) {
            "x" | "X" => Quadrature::X,
            "y" | "Y" => Quadrature::Y,
            other => return Err(cfg_err("detection.quadrature", format!("expected x or y, got `{other}`"))),
        };
        let sided = match d.sided.as_deref().unwrap_or("two") {
            "two" => Sidedness::TwoSided,
            "one" => Sidedness::OneSided,
            other => return Err(cfg_err("detection.sided", format!("expected two or one, got `{other}`"))),
        };
        let ordering = match d.ordering.as_deref().unwrap_or("quantum") {
            "quantum" => Ordering::Quantum,
            "symmetrized" => Ordering::Symmetrized,
            other => {
                return Err(cfg_err(
                    "detection.ordering",
                    format!("expected quantum or symmetrized, got `{other}`"),
                ))
            }
        };
        let chain = DetectionChain {
            a_factor: d.a_factor.unwrap_or(1.0),
            shot_floor: d.shot_floor.unwrap_or(0.0),
            electronic_floor: d.electronic_floor.unwrap_or(0.0),
        };
        chain.validate().map_err(|e| cfg_err("detection", e.to_string()))?;
        Ok(Detection {
            selector: sel,
            sided,
            ordering,
            chain,
        })
    }

    /// Frequency grid in rad/s.
    pub fn grid(&self) -> Result<Vec<f64>> {
        let params = self.system_params()?;
        let g = &self.grid;
        let f_lo = params.mechanical.iter().map(|m| m.omega_m).fold(f64::INFINITY, f64::min);
        let f_hi = params.mechanical.iter().map(|m| m.omega_m).fold(0.0, f64::max);
        let margin = hz_to_rad(1_000.0);
        let lo = g.fmin_hz.map(hz_to_rad).unwrap_or(f_lo - margin);
        let hi = g.fmax_hz.map(hz_to_rad).unwrap_or(f_hi + margin);
        let points = g.points.unwrap_or(grid::DEFAULT_POINTS);
        let base = grid::linear(lo, hi, points).map_err(|e| cfg_err("grid", e.to_string()))?;
        let out = if g.refine.unwrap_or(true) {
            grid::refined(&base, &params)
        } else {
            base
        };
        let sided = self.detection()?.sided;
        grid::validate(&out, sided).map_err(|e| cfg_err("grid", e.to_string()))?;
        Ok(out)
    }

    pub fn solver_name(&self) -> String {
        self.solver.name.clone().unwrap_or_else(|| "full".into())
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let o = &self.oracle;
        let d = SimConfig::default();
        let cfg = SimConfig {
            dt: o.dt_s.unwrap_or(d.dt),
            duration: o.duration_s.unwrap_or(d.duration),
            burn_in: o.burn_in_s,
            seed: o.seed.unwrap_or(d.seed),
            segment: o.segment.unwrap_or(d.segment),
            overlap: o.overlap.unwrap_or(d.overlap),
            integrator: o.integrator.clone().unwrap_or(d.integrator),
            record: o.record.unwrap_or(0),
        };
        cfg.validate().map_err(|e| cfg_err("oracle", e.to_string()))?;
        if !(0.0..1.0).contains(&cfg.overlap) {
            return Err(cfg_err("oracle.overlap", "must lie in [0, 1)"));
        }
        Ok(cfg)
    }

    pub fn fit_options(&self) -> Result<CouplingFitOptions> {
        let f = &self.fit;
        let d = CouplingFitOptions::default();
        let lo = f.start_min_hz.map(hz_to_rad).unwrap_or(d.start_range.0);
        let hi = f.start_max_hz.map(hz_to_rad).unwrap_or(d.start_range.1);
        if !(lo > 0.0 && hi > lo) {
            return Err(cfg_err("fit", "need 0 < start_min_hz < start_max_hz"));
        }
        if f.starts == Some(0) {
            return Err(cfg_err("fit.starts", "need at least one start"));
        }
        Ok(CouplingFitOptions {
            starts: f.starts.unwrap_or(d.starts),
            seed: f.seed.unwrap_or(d.seed),
            fit_scale: f.fit_scale.unwrap_or(d.fit_scale),
            tie_probe: f.tie_probe.unwrap_or(d.tie_probe),
            start_range: (lo, hi),
            lm: d.lm,
        })
    }

    /// Synthetic beat configuration and lock-in bandwidth (Hz).
    pub fn beat_config(&self) -> Result<(BeatConfig, f64)> {
        let p = self.system_params()?;
        let c = &self.calibration;
        let eps_m = non_negative("calibration.eps_m", c.eps_m.unwrap_or(2e6))?;
        let mut b = BeatConfig::for_pump(p.optical[PUMP].power.max(f64::MIN_POSITIVE), p.optical[PUMP].omega_l, eps_m);
        if let Some(v) = c.modulation_hz {
            b.omega_mod = hz_to_rad(positive("calibration.modulation_hz", v)?);
        }
        if let Some(v) = c.offset_hz {
            b.delta = hz_to_rad(positive("calibration.offset_hz", v)?);
        }
        if let Some(v) = c.duration_s {
            b.duration = positive("calibration.duration_s", v)?;
        }
        if let Some(v) = c.sample_rate_hz {
            b.sample_rate = positive("calibration.sample_rate_hz", v)?;
        }
        if let Some(v) = c.a_factor {
            b.a_factor = positive("calibration.a_factor", v)?;
        }
        if let Some(v) = c.noise_std {
            b.noise_std = non_negative("calibration.noise_std", v)?;
        }
        if let Some(v) = c.seed {
            b.seed = v;
        }
        let bw = positive("calibration.bandwidth_hz", c.bandwidth_hz.unwrap_or(DEFAULT_BANDWIDTH))?;
        if c.data.is_none() {
            b.validate().map_err(|e| cfg_err("calibration", e.to_string()))?;
        }
        Ok((b, bw))
    }

    /// Seed intensities for the cancellation run.
    pub fn cancellation_levels(&self) -> Result<Vec<f64>> {
        let levels = self.cancellation.eps_m_sq.clone().unwrap_or_else(|| vec![6.7e13, 1.1e14]);
        if levels.is_empty() {
            return Err(cfg_err("cancellation.eps_m_sq", "need at least one level"));
        }
        for (i, v) in levels.iter().enumerate() {
            non_negative(&format!("cancellation.eps_m_sq[{i}]"), *v)?;
        }
        if let Some(bw) = self.cancellation.measurement_bw_hz {
            positive("cancellation.measurement_bw_hz", bw)?;
        }
        Ok(levels)
    }

    /// Pump amplitude noise for a cancellation seed `eps_m_sq`.
    pub fn cancellation_noise(&self, eps_m_sq: f64) -> LaserNoise {
        let bw = self.cancellation.measurement_bw_hz.unwrap_or(presets::MEASUREMENT_BW_HZ);
        presets::white_amplitude_noise(eps_m_sq / bw)
    }
}

impl LaserNoiseSection {
    fn resolve(&self, key: &str) -> Result<LaserNoise> {
        let mut n = LaserNoise::default();
        let k = |f: &str| format!("{key}.{f}");
        n.gamma_eps = match (self.amplitude_strength, self.amplitude_white_level) {
            (Some(_), Some(_)) => {
                return Err(cfg_err(&k("amplitude_strength"), "give either the strength or the white level, not both"))
            }
            (Some(s), None) => non_negative(&k("amplitude_strength"), s)?,
            (None, Some(w)) => non_negative(&k("amplitude_white_level"), w)? / 2.0,
            (None, None) => 0.0,
        };
        n.gamma_l = match (self.phase_strength_rad_s, self.phase_white_level_rad_s) {
            (Some(_), Some(_)) => {
                return Err(cfg_err(&k("phase_strength_rad_s"), "give either the strength or the white level, not both"))
            }
            (Some(s), None) => non_negative(&k("phase_strength_rad_s"), s)?,
            (None, Some(w)) => non_negative(&k("phase_white_level_rad_s"), w)? / 2.0,
            (None, None) => 0.0,
        };
        let default_bw = presets::WHITE_NOISE_BANDWIDTH_HZ;
        n.gamma_eps_bw = hz_to_rad(positive(&k("amplitude_bandwidth_hz"), self.amplitude_bandwidth_hz.unwrap_or(default_bw))?);
        n.gamma_phi_bw = hz_to_rad(positive(&k("phase_bandwidth_hz"), self.phase_bandwidth_hz.unwrap_or(default_bw))?);
        if n.gamma_eps == 0.0 {
            n.gamma_eps_bw = 0.0;
        }
        if n.gamma_l == 0.0 {
            n.gamma_phi_bw = 0.0;
        }
        Ok(n)
    }
}
