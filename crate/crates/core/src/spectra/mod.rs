//! Output-quadrature noise spectra.
//!
//! `S(omega) = sum_ij c_i(omega) C_ij(omega) c_j(-omega)` with the global 2π of
//! the delta contraction dropped. Spectra are two-sided unless requested
//! otherwise; the one-sided value at `omega >= 0` is `S(omega) + S(-omega)`.

pub mod dips;
pub mod grid;
pub mod rwa;
pub mod solver;
pub mod system;

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{solve_steady_state, SteadyState, SystemParams, PROBE, PUMP};
use crate::noise::{correlation_matrix, NoiseBasis, Ordering};
use crate::units::rad_to_hz;
pub use solver::{by_name, SolverRegistry, TransferSolver};
use system::{CMatrix, A, A_DAG};

pub const CONVENTION: &str = "f(w)=int f(t) exp(i w t) dt; <n_i(w) n_j(w')> = 2pi C_ij delta(w+w'); S = sum c_i C_ij c_j(-w), 2pi dropped";

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    X,
    Y,
}

impl Quadrature {
    /// Weights `(w, w_dag)` such that `Q = w a + w_dag a^dag`.
    pub fn weights(self, lo_phase: f64) -> (C64, C64) {
        let down = C64::from_polar(FRAC_1_SQRT_2, -lo_phase);
        let up = C64::from_polar(FRAC_1_SQRT_2, lo_phase);
        match self {
            Quadrature::X => (down, up),
            Quadrature::Y => (-I * down, I * up),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sidedness {
    #[default]
    TwoSided,
    OneSided,
}

impl Sidedness {
    pub fn label(self) -> &'static str {
        match self {
            Sidedness::TwoSided => "two-sided",
            Sidedness::OneSided => "one-sided",
        }
    }
}

/// Detected field quadrature: `Q_out = sqrt(kappa_lk) Q(a_k) - Q(input at mirror l)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSelector {
    pub quadrature: Quadrature,
    pub mode: usize,
    /// 1 = input mirror (reflection), 2 = output mirror (transmission).
    pub mirror: usize,
    pub lo_phase: f64,
    /// Allows ports other than pump transmission and probe reflection.
    pub generic: bool,
}

impl QuadratureSelector {
    /// Amplitude quadrature of the pump transmitted through mirror 2.
    pub fn transmission_x(lo_phase: f64) -> Self {
        Self {
            quadrature: Quadrature::X,
            mode: PUMP,
            mirror: 2,
            lo_phase,
            generic: false,
        }
    }

    /// Phase quadrature of the probe reflected at mirror 1.
    pub fn reflection_y(lo_phase: f64) -> Self {
        Self {
            quadrature: Quadrature::Y,
            mode: PROBE,
            mirror: 1,
            lo_phase,
            generic: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode > 1 || !(self.mirror == 1 || self.mirror == 2) {
            return Err(Error::UnsupportedPort {
                mode: self.mode,
                mirror: self.mirror,
            });
        }
        let native = (self.mode, self.mirror) == (PUMP, 2) || (self.mode, self.mirror) == (PROBE, 1);
        if !native && !self.generic {
            return Err(Error::UnsupportedPort {
                mode: self.mode,
                mirror: self.mirror,
            });
        }
        if !self.lo_phase.is_finite() {
            return Err(Error::invalid("lo_phase", "non-finite"));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        let q = match self.quadrature {
            Quadrature::X => "X",
            Quadrature::Y => "Y",
        };
        format!("{q}_out[mode={},mirror={}]", self.mode, self.mirror)
    }
}

/// Coefficients `c_i` of `Q_out(omega) = sum_i c_i n_i(omega)` given `T(omega)`.
pub fn output_quadrature_row(params: &SystemParams, sel: &QuadratureSelector, transfer: &CMatrix) -> Result<Vec<C64>> {
    sel.validate()?;
    let basis = NoiseBasis::for_params(params);
    let (w, wd) = sel.quadrature.weights(sel.lo_phase);
    let k = sel.mode;
    let root = params.optical[k].port_kappa(sel.mirror).sqrt();
    let mut row: Vec<C64> = (0..basis.len())
        .map(|c| root * (w * transfer[(A[k], c)] + wd * transfer[(A_DAG[k], c)]))
        .collect();
    row[basis.a_in(sel.mirror, k, false)] -= w;
    row[basis.a_in(sel.mirror, k, true)] -= wd;
    if sel.mirror == 1 {
        row[basis.eps(k)] -= w + wd;
    }
    Ok(row)
}

/// Noise-source groups used to split a spectrum into contributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Vacuum,
    Thermal,
    Amplitude,
    Phase,
}

impl Source {
    pub const ALL: [Source; 4] = [Source::Vacuum, Source::Thermal, Source::Amplitude, Source::Phase];

    fn of(index: usize) -> Source {
        match index {
            0..=7 | 16..=19 => Source::Vacuum,
            8..=11 => Source::Thermal,
            12 | 13 => Source::Amplitude,
            _ => Source::Phase,
        }
    }
}

/// Steady state plus solver, reusable across frequencies and quadratures.
pub struct SpectrumEngine<'a> {
    pub params: &'a SystemParams,
    pub steady: SteadyState,
    pub solver: &'a dyn TransferSolver,
    pub ordering: Ordering,
}

impl<'a> SpectrumEngine<'a> {
    pub fn new(params: &'a SystemParams, solver: &'a dyn TransferSolver) -> Result<Self> {
        let steady = solve_steady_state(params)?;
        Ok(Self::with_steady(params, steady, solver))
    }

    pub fn with_steady(params: &'a SystemParams, steady: SteadyState, solver: &'a dyn TransferSolver) -> Self {
        Self {
            params,
            steady,
            solver,
            ordering: Ordering::Quantum,
        }
    }

    pub fn ordering(mut self, ordering: Ordering) -> Self {
        self.ordering = ordering;
        self
    }

    pub fn transfer(&self, omega: f64) -> Result<CMatrix> {
        self.solver.transfer(self.params, &self.steady, omega)
    }

    pub fn coefficient_row(&self, sel: &QuadratureSelector, omega: f64) -> Result<Vec<C64>> {
        output_quadrature_row(self.params, sel, &self.transfer(omega)?)
    }

    /// Two-sided spectral density split by noise source (complex, before taking the real part).
    pub fn point_by_source(&self, sel: &QuadratureSelector, omega: f64) -> Result<BTreeMap<Source, C64>> {
        let plus = self.coefficient_row(sel, omega)?;
        let minus = self.coefficient_row(sel, -omega)?;
        let corr = correlation_matrix(self.params, omega, self.ordering);
        let mut out: BTreeMap<Source, C64> = Source::ALL.iter().map(|s| (*s, C64::new(0.0, 0.0))).collect();
        for &(i, j, v) in corr.entries() {
            *out.entry(Source::of(i)).or_default() += plus[i] * v * minus[j];
        }
        Ok(out)
    }

    /// Two-sided spectral density at `omega`.
    pub fn point(&self, sel: &QuadratureSelector, omega: f64) -> Result<C64> {
        Ok(self.point_by_source(sel, omega)?.values().sum())
    }

    pub fn psd(&self, sel: &QuadratureSelector, grid: &[f64], sided: Sidedness) -> Result<SpectrumResult> {
        self.psd_filtered(sel, grid, sided, &Source::ALL)
    }

    /// Spectrum restricted to the given noise sources.
    pub fn psd_filtered(
        &self,
        sel: &QuadratureSelector,
        grid: &[f64],
        sided: Sidedness,
        sources: &[Source],
    ) -> Result<SpectrumResult> {
        sel.validate()?;
        grid::validate(grid, sided)?;
        let eval = |w: f64| -> Result<C64> {
            let parts = self.point_by_source(sel, w)?;
            Ok(sources.iter().map(|s| parts[s]).sum())
        };
        let raw: Vec<C64> = grid
            .par_iter()
            .map(|&w| match sided {
                Sidedness::TwoSided => eval(w),
                Sidedness::OneSided => Ok(eval(w)? + eval(-w)?),
            })
            .collect::<Result<_>>()?;

        let max_abs = raw.iter().map(|s| s.re.abs()).fold(0.0, f64::max);
        let mut clamped = 0;
        let mut max_imag_ratio: f64 = 0.0;
        let mut values = Vec::with_capacity(raw.len());
        for s in &raw {
            if s.re != 0.0 || s.im != 0.0 {
                max_imag_ratio = max_imag_ratio.max(s.im.abs() / s.re.abs().max(f64::MIN_POSITIVE));
            }
            let mut v = s.re;
            if v < 0.0 {
                if v >= -1e-12 * max_abs {
                    v = 0.0;
                    clamped += 1;
                } else {
                    log::warn!("negative spectral density {v:.3e} beyond roundoff");
                }
            }
            values.push(v);
        }

        let mut meta = SpectrumMeta::new(self.params, self.solver.name(), sel.label(), sided, self.ordering);
        meta.clamped = clamped;
        meta.max_imag_ratio = max_imag_ratio;
        if sources.len() != Source::ALL.len() {
            let names: Vec<String> = sources.iter().map(|s| format!("{s:?}").to_lowercase()).collect();
            meta.extra.insert("sources".into(), names.join("+"));
        }
        Ok(SpectrumResult {
            omega: grid.to_vec(),
            values,
            meta,
        })
    }
}

/// Spectrum of `sel` on `grid` with the named solver conventions of `solver`.
pub fn psd(
    params: &SystemParams,
    sel: &QuadratureSelector,
    grid: &[f64],
    solver: &dyn TransferSolver,
    sided: Sidedness,
) -> Result<SpectrumResult> {
    SpectrumEngine::new(params, solver)?.psd(sel, grid, sided)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub convention: String,
    pub sided: Sidedness,
    pub ordering: Ordering,
    pub solver: String,
    pub quantity: String,
    pub units: String,
    pub params_hash: String,
    pub clamped: usize,
    pub max_imag_ratio: f64,
    pub extra: BTreeMap<String, String>,
}

impl SpectrumMeta {
    pub fn new(params: &SystemParams, solver: &str, quantity: String, sided: Sidedness, ordering: Ordering) -> Self {
        Self {
            convention: CONVENTION.to_string(),
            sided,
            ordering,
            solver: solver.to_string(),
            quantity,
            units: "quanta per (rad/s)".to_string(),
            params_hash: params_hash(params),
            clamped: 0,
            max_imag_ratio: 0.0,
            extra: BTreeMap::new(),
        }
    }

    /// Flattened `key=value` pairs for CSV headers.
    pub fn pairs(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("convention".to_string(), self.convention.clone()),
            ("sided".to_string(), self.sided.label().to_string()),
            ("ordering".to_string(), format!("{:?}", self.ordering).to_lowercase()),
            ("solver".to_string(), self.solver.clone()),
            ("quantity".to_string(), self.quantity.clone()),
            ("units".to_string(), self.units.clone()),
            ("params_hash".to_string(), self.params_hash.clone()),
            ("clamped".to_string(), self.clamped.to_string()),
            ("max_imag_ratio".to_string(), format!("{:.3e}", self.max_imag_ratio)),
        ];
        out.extend(self.extra.iter().map(|(k, v)| (k.clone(), v.clone())));
        out
    }
}

/// Hex SHA-256 of the JSON-serialised parameters.
pub fn params_hash(params: &SystemParams) -> String {
    let json = serde_json::to_vec(params).expect("parameters serialise");
    Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// Angular frequencies, rad/s.
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
    pub meta: SpectrumMeta,
}

impl SpectrumResult {
    pub fn freq_hz(&self) -> Vec<f64> {
        self.omega.iter().map(|&w| rad_to_hz(w)).collect()
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// Value at the grid point nearest to `omega`.
    pub fn nearest(&self, omega: f64) -> Option<(f64, f64)> {
        let idx = self.omega.partition_point(|&w| w < omega);
        let candidates = [idx.checked_sub(1), (idx < self.len()).then_some(idx)];
        candidates
            .into_iter()
            .flatten()
            .min_by(|&a, &b| (self.omega[a] - omega).abs().total_cmp(&(self.omega[b] - omega).abs()))
            .map(|i| (self.omega[i], self.values[i]))
    }

    /// Point-wise difference; both spectra must share the grid.
    pub fn minus(&self, other: &SpectrumResult) -> Result<SpectrumResult> {
        if self.omega != other.omega {
            return Err(Error::invalid("grid", "spectra are on different grids"));
        }
        let mut out = self.clone();
        for (v, o) in out.values.iter_mut().zip(&other.values) {
            *v -= o;
        }
        Ok(out)
    }
}

/// Scalar detection factor and additive floors mapping model spectra to measured units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionChain {
    pub a_factor: f64,
    pub shot_floor: f64,
    pub electronic_floor: f64,
}

impl Default for DetectionChain {
    fn default() -> Self {
        Self {
            a_factor: 1.0,
            shot_floor: 0.0,
            electronic_floor: 0.0,
        }
    }
}

impl DetectionChain {
    pub fn validate(&self) -> Result<()> {
        if !(self.a_factor > 0.0 && self.a_factor.is_finite()) {
            return Err(Error::invalid("detection.a_factor", "must be positive"));
        }
        if !(self.shot_floor >= 0.0 && self.electronic_floor >= 0.0) {
            return Err(Error::invalid("detection", "noise floors must be non-negative"));
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::default()
    }

    pub fn apply(&self, spec: &SpectrumResult) -> SpectrumResult {
        let mut out = spec.clone();
        let floor = self.shot_floor + self.electronic_floor;
        for v in out.values.iter_mut() {
            *v = self.a_factor * *v + floor;
        }
        out.meta.units = "detector units".to_string();
        out.meta.extra.insert("a_factor".into(), format!("{:e}", self.a_factor));
        out.meta.extra.insert("floor".into(), format!("{floor:e}"));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::solver::FullSolver;
    use super::*;
    use crate::presets;
    use crate::units::hz_to_rad;

    #[test]
    fn quadrature_weights_are_unit_and_orthogonal() {
        for phi in [0.0, 0.4, -2.0] {
            let (xa, xd) = Quadrature::X.weights(phi);
            let (ya, yd) = Quadrature::Y.weights(phi);
            assert!((xa.norm_sqr() + xd.norm_sqr() - 1.0).abs() < 1e-15);
            // hermitian: the dagger weight is the conjugate of the plain one
            assert!((xd - xa.conj()).norm() < 1e-15);
            assert!((yd - ya.conj()).norm() < 1e-15);
            // [X, Y] = i for [a, a^dag] = 1
            let comm = xa * yd - xd * ya;
            assert!((comm - I).norm() < 1e-15);
        }
    }

    #[test]
    fn native_ports_only_unless_generic() {
        let mut sel = QuadratureSelector::transmission_x(0.0);
        assert!(sel.validate().is_ok());
        sel.mirror = 1;
        assert!(matches!(sel.validate(), Err(Error::UnsupportedPort { mode: 1, mirror: 1 })));
        sel.generic = true;
        assert!(sel.validate().is_ok());
        sel.mirror = 3;
        assert!(sel.validate().is_err());
    }

    #[test]
    fn amplitude_noise_direct_transmission_term() {
        let p = presets::fig4c().with_couplings([[0.0; 2]; 2]);
        let eng = SpectrumEngine::new(&p, &FullSolver).unwrap();
        let sel = QuadratureSelector::transmission_x(0.3);
        let w = hz_to_rad(2.0e5);
        let row = eng.coefficient_row(&sel, w).unwrap();
        let m = &p.optical[PUMP];
        let chi = eng.steady.chi_c(PUMP, w);
        let chi_d = eng.steady.chi_c(PUMP, -w).conj();
        let phi = C64::from_polar(1.0, 0.3);
        let expect = (m.kappa2 / 2.0).sqrt() * m.kappa1.sqrt() * (chi_d * phi + chi * phi.conj());
        let got = row[NoiseBasis::new(false).eps(PUMP)];
        assert!((got - expect).norm() <= 1e-12 * expect.norm());
    }

    #[test]
    fn phase_noise_reflection_term() {
        let p = presets::fig5().with_couplings([[0.0; 2]; 2]);
        let eng = SpectrumEngine::new(&p, &FullSolver).unwrap();
        let sel = QuadratureSelector::reflection_y(0.0);
        let w = hz_to_rad(2.3e5);
        let row = eng.coefficient_row(&sel, w).unwrap();
        let a = eng.steady.alpha[PROBE];
        let chi = eng.steady.chi_c(PROBE, w);
        let chi_d = eng.steady.chi_c(PROBE, -w).conj();
        let k1 = p.optical[PROBE].kappa1;
        let expect = (k1 / 2.0).sqrt() * (a.conj() * chi_d + a * chi);
        let got = row[NoiseBasis::new(false).phidot(PROBE)];
        assert!((got - expect).norm() <= 1e-12 * expect.norm());
    }

    #[test]
    fn vacuum_only_spectrum_is_flat() {
        let p = presets::table1().with_couplings([[0.0; 2]; 2]);
        let eng = SpectrumEngine::new(&p, &FullSolver).unwrap();
        let grid = grid::linear(hz_to_rad(1e3), hz_to_rad(1e6), 101).unwrap();
        for sel in [QuadratureSelector::transmission_x(0.0), QuadratureSelector::reflection_y(0.7)] {
            let s = eng.psd(&sel, &grid, Sidedness::TwoSided).unwrap();
            for v in &s.values {
                assert!((v - s.values[0]).abs() < 1e-12, "{v}");
            }
        }
    }

    #[test]
    fn params_hash_is_stable_and_sensitive() {
        let a = presets::fig4c();
        let mut b = a.clone();
        assert_eq!(params_hash(&a), params_hash(&b));
        b.lo_phase = 1e-9;
        assert_ne!(params_hash(&a), params_hash(&b));
        assert_eq!(params_hash(&a).len(), 64);
    }
}
