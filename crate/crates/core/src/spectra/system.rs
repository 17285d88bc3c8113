//! Linearised Heisenberg-Langevin equations in the frequency domain.
//!
//! Unknowns are ordered `[a0, a0^dag, a1, a1^dag, b0, b0^dag, b1, b1^dag]`,
//! where `x^dag` stands for the Fourier transform of the conjugate operator,
//! `x^dag(omega) = (x(-omega))^dag`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::model::{chi_c, chi_m, SteadyState, SystemParams};
use crate::noise::NoiseBasis;

pub type CMatrix = DMatrix<C64>;

pub const N_VARS: usize = 8;
pub const A: [usize; 2] = [0, 2];
pub const A_DAG: [usize; 2] = [1, 3];
pub const B: [usize; 2] = [4, 6];
pub const B_DAG: [usize; 2] = [5, 7];

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Conjugate-partner row of an unknown.
pub fn var_partner(v: usize) -> usize {
    v ^ 1
}

/// `M(omega) v(omega) = N(omega) n(omega)`.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub omega: f64,
    pub m: CMatrix,
    pub n: CMatrix,
}

/// Input vector driving `a_k` once the optical susceptibility is divided out.
pub fn optical_drive(params: &SystemParams, steady: &SteadyState, basis: &NoiseBasis, k: usize, dagger: bool) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); basis.len()];
    let mode = &params.optical[k];
    let s1 = mode.kappa1.sqrt();
    v[basis.a_in(1, k, dagger)] += s1;
    v[basis.eps(k)] += s1;
    v[basis.a_in(2, k, dagger)] += mode.kappa2.sqrt();
    if let Some(l) = basis.a_loss(k, dagger) {
        v[l] += mode.kappa_l.sqrt();
    }
    let alpha = steady.alpha[k];
    v[basis.phidot(k)] += if dagger { -I * alpha.conj() } else { I * alpha };
    v
}

/// Builds the full 8x8 system at `omega`.
pub fn build(params: &SystemParams, steady: &SteadyState, omega: f64) -> LinearSystem {
    let basis = NoiseBasis::for_params(params);
    let mut m = CMatrix::zeros(N_VARS, N_VARS);
    let mut n = CMatrix::zeros(N_VARS, basis.len());
    let g = &steady.g_eff;

    for k in 0..2 {
        let kappa = steady.kappa[k];
        let d = steady.detuning[k];
        m[(A[k], A[k])] = chi_c(kappa, d, omega).inv();
        m[(A_DAG[k], A_DAG[k])] = chi_c(kappa, d, -omega).conj().inv();
        for j in 0..2 {
            for col in [B[j], B_DAG[j]] {
                m[(A[k], col)] = -I * g[j][k];
                m[(A_DAG[k], col)] = I * g[j][k].conj();
            }
        }
        for (row, dagger) in [(A[k], false), (A_DAG[k], true)] {
            for (c, v) in optical_drive(params, steady, &basis, k, dagger).into_iter().enumerate() {
                n[(row, c)] = v;
            }
        }
    }

    for j in 0..2 {
        let mech = &params.mechanical[j];
        m[(B[j], B[j])] = chi_m(mech.gamma_m, mech.omega_m, omega).inv();
        m[(B_DAG[j], B_DAG[j])] = chi_m(mech.gamma_m, mech.omega_m, -omega).conj().inv();
        for k in 0..2 {
            m[(B[j], A[k])] = -I * g[j][k].conj();
            m[(B[j], A_DAG[k])] = -I * g[j][k];
            m[(B_DAG[j], A[k])] = I * g[j][k].conj();
            m[(B_DAG[j], A_DAG[k])] = I * g[j][k];
        }
        let sg = mech.gamma_m.sqrt();
        n[(B[j], basis.b_in(j, false))] = C64::new(sg, 0.0);
        n[(B_DAG[j], basis.b_in(j, true))] = C64::new(sg, 0.0);
    }

    LinearSystem { omega, m, n }
}

/// RWA variant: the optical unknowns are eliminated from the mechanical rows
/// and every coupling between `b` and `b^dag` is then dropped. The optical
/// rows are kept, so the solve still yields the optical fluctuations.
pub fn build_rwa(params: &SystemParams, steady: &SteadyState, omega: f64) -> LinearSystem {
    let mut sys = build(params, steady, omega);
    let (m, n) = (&mut sys.m, &mut sys.n);
    for row in B.iter().chain(B_DAG.iter()).copied() {
        for o in A.iter().chain(A_DAG.iter()).copied() {
            let f = m[(row, o)] / m[(o, o)];
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for c in 0..N_VARS {
                let v = m[(o, c)];
                m[(row, c)] -= f * v;
            }
            for c in 0..n.ncols() {
                let v = n[(o, c)];
                n[(row, c)] -= f * v;
            }
            m[(row, o)] = C64::new(0.0, 0.0);
        }
    }
    for j in 0..2 {
        for l in 0..2 {
            m[(B[j], B_DAG[l])] = C64::new(0.0, 0.0);
            m[(B_DAG[j], B[l])] = C64::new(0.0, 0.0);
        }
    }
    sys
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::solve_steady_state;
    use crate::presets;

    #[test]
    fn rwa_elimination_reproduces_dressed_diagonal() {
        let p = presets::fig4c();
        let ss = solve_steady_state(&p).unwrap();
        let w = p.mechanical[0].omega_m + 2.0;
        let sys = build_rwa(&p, &ss, w);
        let d = crate::model::chi_m_dressed(0, &ss, &p, w).unwrap().inv();
        let got = sys.m[(B[0], B[0])];
        assert!((got - d).norm() <= 1e-10 * d.norm(), "{got} vs {d}");
        for o in A.iter().chain(A_DAG.iter()) {
            assert_eq!(sys.m[(B[1], *o)], C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn rows_are_conjugate_mirrors() {
        let p = presets::fig5();
        let ss = solve_steady_state(&p).unwrap();
        let basis = NoiseBasis::for_params(&p);
        let w = 1.3e6;
        let plus = build(&p, &ss, w);
        let minus = build(&p, &ss, -w);
        for r in 0..N_VARS {
            for c in 0..N_VARS {
                let lhs = plus.m[(var_partner(r), var_partner(c))];
                let rhs = minus.m[(r, c)].conj();
                assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0));
            }
            for c in 0..basis.len() {
                let lhs = plus.n[(var_partner(r), basis.partner(c))];
                let rhs = minus.n[(r, c)].conj();
                assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0));
            }
        }
    }
}
