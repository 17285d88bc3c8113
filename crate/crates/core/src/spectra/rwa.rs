//! Closed-form mechanical response in the rotating-wave approximation.
//!
//! Each membrane obeys `[chi'_j]^-1 b_j + i C b_o = R_j` once the optical
//! fluctuations are eliminated and `b^dag` is dropped, where
//! `C = sum_k g0_jk g0_ok sigma_k` and `R_j` collects the noise drives. The
//! pair is solved as `b_j = chi_rwa_j (R_j - i C chi'_o R_o)`.

use num_complex::Complex64 as C64;

use super::system::{optical_drive, CMatrix, A, A_DAG, B, B_DAG, N_VARS};
use crate::error::Result;
use crate::model::{chi_m_dressed, chi_m_rwa, CrossSusceptibility, SteadyState, SystemParams};
use crate::noise::NoiseBasis;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Noise drive `R_j(omega)` of membrane `j`, as coefficients over the basis.
pub fn mechanical_drive(params: &SystemParams, steady: &SteadyState, j: usize, omega: f64) -> Vec<C64> {
    let basis = NoiseBasis::for_params(params);
    let mut r = vec![C64::new(0.0, 0.0); basis.len()];
    r[basis.b_in(j, false)] = C64::new(params.mechanical[j].gamma_m.sqrt(), 0.0);
    for k in 0..2 {
        let g = steady.g_eff[j][k];
        let up = I * g.conj() * steady.chi_c(k, omega);
        let down = I * g * steady.chi_c(k, -omega).conj();
        let na = optical_drive(params, steady, &basis, k, false);
        let nad = optical_drive(params, steady, &basis, k, true);
        for c in 0..basis.len() {
            r[c] += up * na[c] + down * nad[c];
        }
    }
    r
}

/// Coefficients of `b_j(omega)` over the noise basis.
pub fn b_coefficients(
    params: &SystemParams,
    steady: &SteadyState,
    j: usize,
    omega: f64,
    cross: CrossSusceptibility,
) -> Result<Vec<C64>> {
    let o = 1 - j;
    let g0 = &params.couplings.g0;
    let c: C64 = (0..2).map(|k| g0[j][k] * g0[o][k] * steady.sigma(k, omega)).sum();
    let chi_o = match cross {
        CrossSusceptibility::Dressed => chi_m_dressed(o, steady, params, omega)?,
        CrossSusceptibility::Bare => params.mechanical[o].chi(omega),
    };
    let chi_j = chi_m_rwa(j, steady, params, omega, cross)?;
    let rj = mechanical_drive(params, steady, j, omega);
    let ro = mechanical_drive(params, steady, o, omega);
    Ok(rj.iter().zip(&ro).map(|(a, b)| chi_j * (a - I * c * chi_o * b)).collect())
}

/// Full `8 x n` transfer matrix with the mechanics from the closed form.
pub fn transfer(params: &SystemParams, steady: &SteadyState, omega: f64, cross: CrossSusceptibility) -> Result<CMatrix> {
    let basis = NoiseBasis::for_params(params);
    let n = basis.len();
    let mut t = CMatrix::zeros(N_VARS, n);
    for j in 0..2 {
        let plus = b_coefficients(params, steady, j, omega, cross)?;
        let minus = b_coefficients(params, steady, j, -omega, cross)?;
        for c in 0..n {
            t[(B[j], c)] = plus[c];
            t[(B_DAG[j], c)] = minus[basis.partner(c)].conj();
        }
    }
    for k in 0..2 {
        let na = optical_drive(params, steady, &basis, k, false);
        let nad = optical_drive(params, steady, &basis, k, true);
        let chi = steady.chi_c(k, omega);
        let chi_d = steady.chi_c(k, -omega).conj();
        for c in 0..n {
            let mut x = C64::new(0.0, 0.0);
            let mut xd = C64::new(0.0, 0.0);
            for j in 0..2 {
                let q = t[(B[j], c)] + t[(B_DAG[j], c)];
                x += steady.g_eff[j][k] * q;
                xd += steady.g_eff[j][k].conj() * q;
            }
            t[(A[k], c)] = chi * (na[c] + I * x);
            t[(A_DAG[k], c)] = chi_d * (nad[c] - I * xd);
        }
    }
    Ok(t)
}
