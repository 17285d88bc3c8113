//! Real linear SDE `ds = A s dt + B dW` for the fluctuation fields, with
//! outputs `y dt = C s dt + D dW`.
//!
//! State layout: `[Re a0, Im a0, Re a1, Im a1, Re b0, Im b0, Re b1, Im b1]`
//! followed by one Ornstein-Uhlenbeck coordinate per active laser-noise
//! source. White inputs carry symmetrized strengths (1/2 for vacuum, n + 1/2
//! for thermal baths), split evenly between their two real quadratures.

use std::f64::consts::SQRT_2;

use nalgebra::DMatrix;

use crate::model::{SteadyState, SystemParams};
use crate::spectra::{Quadrature, QuadratureSelector};

pub const FIELD_STATES: usize = 8;

/// A signal recorded by the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleOutput {
    /// Output quadrature at a cavity port.
    Quadrature(QuadratureSelector),
    /// `b_j + b_j^dag` of one membrane.
    Mechanical(usize),
}

impl OracleOutput {
    pub fn label(&self) -> String {
        match self {
            OracleOutput::Quadrature(sel) => sel.label(),
            OracleOutput::Mechanical(j) => format!("b{j}+b{j}^dag"),
        }
    }
}

/// Kind of an extra coloured-noise state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColouredSource {
    Amplitude(usize),
    Phase(usize),
}

#[derive(Debug, Clone)]
pub struct LinearSde {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub coloured: Vec<ColouredSource>,
    pub labels: Vec<String>,
}

impl LinearSde {
    pub fn states(&self) -> usize {
        self.a.nrows()
    }

    pub fn channels(&self) -> usize {
        self.b.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }
}

fn re_a(k: usize) -> usize {
    2 * k
}
fn re_b(j: usize) -> usize {
    4 + 2 * j
}

/// Output weights `(on Re z, on Im z)` of a quadrature, so that
/// `X = sqrt2 (x cos phi + y sin phi)` and `Y = sqrt2 (y cos phi - x sin phi)`.
fn quadrature_weights(q: Quadrature, phi: f64) -> (f64, f64) {
    let (s, c) = phi.sin_cos();
    match q {
        Quadrature::X => (SQRT_2 * c, SQRT_2 * s),
        Quadrature::Y => (-SQRT_2 * s, SQRT_2 * c),
    }
}

/// Builds the drift, noise and output matrices from the linearised Langevin
/// equations in the rotating frame.
pub fn build(params: &SystemParams, steady: &SteadyState, outputs: &[OracleOutput]) -> LinearSde {
    let mut coloured = Vec::new();
    for k in 0..2 {
        let l = &params.noise.lasers[k];
        if l.gamma_eps > 0.0 {
            coloured.push(ColouredSource::Amplitude(k));
        }
        if l.gamma_l > 0.0 {
            coloured.push(ColouredSource::Phase(k));
        }
    }
    let n = FIELD_STATES + coloured.len();
    let ou_index = |src: ColouredSource| coloured.iter().position(|&c| c == src).map(|i| FIELD_STATES + i);

    let mut a = DMatrix::zeros(n, n);
    let mut cols: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels = Vec::new();
    // Output feed-through of every white column, filled in below.
    let mut white_inputs: Vec<(usize, usize, usize)> = Vec::new(); // (mirror, mode, first column)

    for k in 0..2 {
        let (x, y) = (re_a(k), re_a(k) + 1);
        let kap = steady.kappa[k] / 2.0;
        let det = steady.detuning[k];
        a[(x, x)] = -kap;
        a[(x, y)] = det;
        a[(y, x)] = -det;
        a[(y, y)] = -kap;
        for j in 0..2 {
            // i g (b + b^dag) = i g 2 Re b
            let g = steady.g_eff[j][k];
            a[(x, re_b(j))] += -2.0 * g.im;
            a[(y, re_b(j))] += 2.0 * g.re;
        }
        let mode = &params.optical[k];
        let mut ports = vec![(1, mode.kappa1), (2, mode.kappa2)];
        if params.include_loss_port {
            ports.push((0, mode.kappa_l));
        }
        for (mirror, rate) in ports {
            let amp = (rate * 0.25).sqrt();
            white_inputs.push((mirror, k, cols.len()));
            cols.push(vec![(x, amp)]);
            cols.push(vec![(y, amp)]);
            labels.push(format!("a_in{mirror}_{k}.re"));
            labels.push(format!("a_in{mirror}_{k}.im"));
        }
        if let Some(i) = ou_index(ColouredSource::Amplitude(k)) {
            a[(x, i)] += mode.kappa1.sqrt();
        }
        if let Some(i) = ou_index(ColouredSource::Phase(k)) {
            // i alpha phidot
            let al = steady.alpha[k];
            a[(x, i)] += -al.im;
            a[(y, i)] += al.re;
        }
    }
    for j in 0..2 {
        let (u, v) = (re_b(j), re_b(j) + 1);
        let m = &params.mechanical[j];
        a[(u, u)] = -m.gamma_m / 2.0;
        a[(u, v)] = m.omega_m;
        a[(v, u)] = -m.omega_m;
        a[(v, v)] = -m.gamma_m / 2.0;
        for k in 0..2 {
            // i (g* a + g a^dag) = 2i Re(g* a)
            let g = steady.g_eff[j][k];
            a[(v, re_a(k))] += 2.0 * g.re;
            a[(v, re_a(k) + 1)] += 2.0 * g.im;
        }
        let amp = (m.gamma_m * (m.n_th + 0.5) / 2.0).sqrt();
        cols.push(vec![(u, amp)]);
        cols.push(vec![(v, amp)]);
        labels.push(format!("b_in{j}.re"));
        labels.push(format!("b_in{j}.im"));
    }
    for (ci, src) in coloured.iter().enumerate() {
        let i = FIELD_STATES + ci;
        let (strength, bw, name) = match *src {
            ColouredSource::Amplitude(k) => {
                let l = &params.noise.lasers[k];
                (l.gamma_eps, l.gamma_eps_bw, format!("eps{k}"))
            }
            ColouredSource::Phase(k) => {
                let l = &params.noise.lasers[k];
                (l.gamma_l, l.gamma_phi_bw, format!("phidot{k}"))
            }
        };
        a[(i, i)] = -bw;
        cols.push(vec![(i, (2.0 * strength * bw * bw).sqrt())]);
        labels.push(name);
    }

    let m = cols.len();
    let mut b = DMatrix::zeros(n, m);
    for (ci, col) in cols.iter().enumerate() {
        for &(r, v) in col {
            b[(r, ci)] = v;
        }
    }

    let p = outputs.len();
    let mut c = DMatrix::zeros(p, n);
    let mut d = DMatrix::zeros(p, m);
    for (o, out) in outputs.iter().enumerate() {
        match *out {
            OracleOutput::Mechanical(j) => c[(o, re_b(j))] = 2.0,
            OracleOutput::Quadrature(sel) => {
                let k = sel.mode;
                let (wx, wy) = quadrature_weights(sel.quadrature, sel.lo_phase);
                let root = params.optical[k].port_kappa(sel.mirror).sqrt();
                c[(o, re_a(k))] = root * wx;
                c[(o, re_a(k) + 1)] = root * wy;
                let &(_, _, col) = white_inputs
                    .iter()
                    .find(|(mi, mk, _)| *mi == sel.mirror && *mk == k)
                    .expect("every mirror has an input");
                // white columns carry sqrt(rate/4); the bare input has 1/2 per quadrature
                d[(o, col)] = -wx * 0.5;
                d[(o, col + 1)] = -wy * 0.5;
                if sel.mirror == 1 {
                    if let Some(i) = ou_index(ColouredSource::Amplitude(k)) {
                        c[(o, i)] -= wx;
                    }
                }
            }
        }
    }
    LinearSde {
        a,
        b,
        c,
        d,
        coloured,
        labels,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::solve_steady_state;
    use crate::presets;
    use crate::spectra::system;
    use num_complex::Complex64 as C64;

    /// The complex drift in the `[a, a^dag, b, b^dag]` basis must equal
    /// `-M(0)` of the frequency-domain system.
    #[test]
    fn drift_matches_frequency_domain_system() {
        let p = presets::fig4c();
        let ss = solve_steady_state(&p).unwrap();
        let sde = build(&p, &ss, &[]);
        let sys = system::build(&p, &ss, 0.0);
        // z = x + i y, z* = x - i y; T maps real (x, y) pairs to (z, z*).
        let mut t = DMatrix::<C64>::zeros(8, 8);
        for f in 0..4 {
            t[(2 * f, 2 * f)] = C64::new(1.0, 0.0);
            t[(2 * f, 2 * f + 1)] = C64::new(0.0, 1.0);
            t[(2 * f + 1, 2 * f)] = C64::new(1.0, 0.0);
            t[(2 * f + 1, 2 * f + 1)] = C64::new(0.0, -1.0);
        }
        let a_real = sde.a.view((0, 0), (8, 8)).map(|v| C64::new(v, 0.0));
        let a_c = &t * a_real * t.clone().try_inverse().unwrap();
        let scale = sys.m.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for r in 0..8 {
            for c in 0..8 {
                let diff = (a_c[(r, c)] + sys.m[(r, c)]).norm();
                assert!(diff < 1e-12 * scale, "({r},{c}) {} vs {}", a_c[(r, c)], -sys.m[(r, c)]);
            }
        }
    }
}
