//! Transfer-function solvers, registered by name.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::rwa;
use super::system::{self, CMatrix, LinearSystem, N_VARS};
use crate::error::{Error, Result};
use crate::model::{CrossSusceptibility, SteadyState, SystemParams};

/// Condition number above which a per-frequency system counts as singular.
pub const MAX_CONDITION: f64 = 1e14;

/// Maps the noise inputs to the eight fluctuation operators at one frequency.
pub trait TransferSolver: Send + Sync {
    fn name(&self) -> &str;

    /// `T(omega)`, an `8 x n_inputs` matrix with `v = T n`.
    fn transfer(&self, params: &SystemParams, steady: &SteadyState, omega: f64) -> Result<CMatrix>;
}

/// Full linear solve of the 8x8 system.
#[derive(Debug, Default, Clone, Copy)]
pub struct FullSolver;

impl TransferSolver for FullSolver {
    fn name(&self) -> &str {
        "full"
    }

    fn transfer(&self, params: &SystemParams, steady: &SteadyState, omega: f64) -> Result<CMatrix> {
        solve(system::build(params, steady, omega))
    }
}

/// Linear solve of the system with the counter-rotating mechanical couplings removed.
#[derive(Debug, Default, Clone, Copy)]
pub struct RwaLinearSolver;

impl TransferSolver for RwaLinearSolver {
    fn name(&self) -> &str {
        "rwa-linear"
    }

    fn transfer(&self, params: &SystemParams, steady: &SteadyState, omega: f64) -> Result<CMatrix> {
        solve(system::build_rwa(params, steady, omega))
    }
}

/// Closed-form RWA mechanical solution substituted back into the optical rows.
#[derive(Debug, Default, Clone, Copy)]
pub struct RwaSolver {
    pub cross: CrossSusceptibility,
}

impl TransferSolver for RwaSolver {
    fn name(&self) -> &str {
        match self.cross {
            CrossSusceptibility::Dressed => "rwa",
            CrossSusceptibility::Bare => "rwa-bare",
        }
    }

    fn transfer(&self, params: &SystemParams, steady: &SteadyState, omega: f64) -> Result<CMatrix> {
        rwa::transfer(params, steady, omega, self.cross)
    }
}

/// Row-equilibrated LU solve with a 1-norm condition estimate.
pub fn solve(sys: LinearSystem) -> Result<CMatrix> {
    let LinearSystem { omega, mut m, mut n } = sys;
    for r in 0..N_VARS {
        let scale = m.row(r).iter().map(|v| v.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return Err(Error::SingularSystem { omega, cond: f64::INFINITY });
        }
        m.row_mut(r).scale_mut(1.0 / scale);
        n.row_mut(r).scale_mut(1.0 / scale);
    }
    let norm1 = |a: &CMatrix| {
        (0..a.ncols())
            .map(|c| a.column(c).iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let inv = m
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::SingularSystem { omega, cond: f64::INFINITY })?;
    let cond = norm1(&m) * norm1(&inv);
    if !(cond <= MAX_CONDITION) {
        return Err(Error::SingularSystem { omega, cond });
    }
    Ok(inv * n)
}

type Factory = Arc<dyn Fn() -> Box<dyn TransferSolver> + Send + Sync>;

/// Name -> solver lookup used by the spectrum pipeline and the CLI.
#[derive(Clone)]
pub struct SolverRegistry {
    factories: BTreeMap<String, Factory>,
}

impl Default for SolverRegistry {
    fn default() -> Self {
        let mut reg = Self {
            factories: BTreeMap::new(),
        };
        reg.register("full", || Box::new(FullSolver));
        reg.register("rwa", || Box::new(RwaSolver::default()));
        reg.register("rwa-bare", || {
            Box::new(RwaSolver {
                cross: CrossSusceptibility::Bare,
            })
        });
        reg.register("rwa-linear", || Box::new(RwaLinearSolver));
        reg
    }
}

impl SolverRegistry {
    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn() -> Box<dyn TransferSolver> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_string(), Arc::new(factory));
    }

    pub fn create(&self, name: &str) -> Result<Box<dyn TransferSolver>> {
        self.factories
            .get(name)
            .map(|f| f())
            .ok_or_else(|| Error::UnknownSolver(name.to_string()))
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }
}

/// Looks a solver up in the default registry.
pub fn by_name(name: &str) -> Result<Box<dyn TransferSolver>> {
    SolverRegistry::default().create(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::solve_steady_state;
    use crate::presets;

    #[test]
    fn registry_lists_builtin_solvers() {
        let reg = SolverRegistry::default();
        assert_eq!(reg.names(), vec!["full", "rwa", "rwa-bare", "rwa-linear"]);
        for name in reg.names() {
            assert_eq!(reg.create(name).unwrap().name(), name);
        }
        assert!(matches!(reg.create("exact"), Err(Error::UnknownSolver(_))));
    }

    #[test]
    fn decoupled_optical_block_is_cavity_filter() {
        let p = presets::fig4c().with_couplings([[0.0; 2]; 2]);
        let ss = solve_steady_state(&p).unwrap();
        let basis = crate::noise::NoiseBasis::for_params(&p);
        let w = 2.1e5;
        let t = FullSolver.transfer(&p, &ss, w).unwrap();
        for k in 0..2 {
            let chi = ss.chi_c(k, w);
            let drive = system::optical_drive(&p, &ss, &basis, k, false);
            for c in 0..basis.len() {
                let expect = chi * drive[c];
                let got = t[(system::A[k], c)];
                assert!((got - expect).norm() <= 1e-12 * expect.norm().max(1e-30));
            }
        }
    }

    #[test]
    fn rwa_closed_form_matches_linear_solve() {
        let p = presets::fig4c();
        let ss = solve_steady_state(&p).unwrap();
        let wm = p.mechanical[0].omega_m;
        let gm = p.mechanical[0].gamma_m;
        for i in 0..64 {
            let w = wm + (i as f64 - 31.5) * gm;
            let a = RwaLinearSolver.transfer(&p, &ss, w).unwrap();
            let b = RwaSolver::default().transfer(&p, &ss, w).unwrap();
            for r in 0..N_VARS {
                let scale = a.row(r).iter().map(|v| v.norm()).fold(0.0, f64::max);
                let diff = (a.row(r) - b.row(r)).iter().map(|v| v.norm()).fold(0.0, f64::max);
                assert!(diff <= 1e-9 * scale, "omega {w} row {r}: {diff} vs {scale}");
            }
        }
    }
}
