//! Time steppers for a [`LinearSde`], selectable by name.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::sde::LinearSde;
use crate::error::{Error, Result};

/// Advances the state by one sample interval and produces the outputs
/// averaged over that interval.
pub trait Stepper: Send {
    fn step(&mut self, state: &mut [f64], outputs: &mut [f64], rng: &mut ChaCha8Rng);
}

pub trait Integrator: Send + Sync {
    fn name(&self) -> &str;
    fn prepare(&self, sde: &LinearSde, dt: f64) -> Result<Box<dyn Stepper>>;
}

/// Largest real part of the drift eigenvalues; errors if not strictly negative.
pub fn check_stable(a: &DMatrix<f64>) -> Result<f64> {
    let eig = a.complex_eigenvalues();
    let worst = eig.iter().max_by(|x, y| x.re.total_cmp(&y.re)).expect("non-empty drift");
    if !(worst.re < 0.0) {
        return Err(Error::UnstableSystem {
            re: worst.re,
            im: worst.im,
        });
    }
    Ok(worst.re)
}

/// Exact discretisation: the state transition and the step noise covariance
/// are computed once (Van Loan's block exponential on a short sub-step,
/// then repeated doubling), so any `dt` is stable for a stable drift.
/// Output rows are integrated alongside the state, which makes every sample
/// an exact box average.
#[derive(Debug, Default, Clone, Copy)]
pub struct ExactIntegrator;

/// Euler-Maruyama with outputs sampled at the step start.
#[derive(Debug, Default, Clone, Copy)]
pub struct EulerIntegrator;

/// Dense row-major step `x' = F x + G z`, `y = (H x + K z) / dt`.
struct LinearStepper {
    n: usize,
    r: usize,
    f: Vec<f64>,
    g: Vec<f64>,
    h: Vec<f64>,
    k: Vec<f64>,
    inv_dt: f64,
    z: Vec<f64>,
    next: Vec<f64>,
}

impl LinearStepper {
    fn new(f: &DMatrix<f64>, g: &DMatrix<f64>, h: &DMatrix<f64>, k: &DMatrix<f64>, inv_dt: f64) -> Self {
        let flat = |m: &DMatrix<f64>| m.transpose().as_slice().to_vec();
        Self {
            n: f.nrows(),
            r: g.ncols(),
            f: flat(f),
            g: flat(g),
            h: flat(h),
            k: flat(k),
            inv_dt,
            z: vec![0.0; g.ncols()],
            next: vec![0.0; f.nrows()],
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Stepper for LinearStepper {
    fn step(&mut self, state: &mut [f64], outputs: &mut [f64], rng: &mut ChaCha8Rng) {
        for z in self.z.iter_mut() {
            *z = StandardNormal.sample(rng);
        }
        let (n, r) = (self.n, self.r);
        for (o, out) in outputs.iter_mut().enumerate() {
            *out = (dot(&self.h[o * n..(o + 1) * n], state) + dot(&self.k[o * r..(o + 1) * r], &self.z)) * self.inv_dt;
        }
        for i in 0..n {
            self.next[i] = dot(&self.f[i * n..(i + 1) * n], state) + dot(&self.g[i * r..(i + 1) * r], &self.z);
        }
        state.copy_from_slice(&self.next);
    }
}

/// Factor `L` with `L L^T = Q` for a symmetric positive semi-definite `Q`,
/// dropping numerically null directions.
fn psd_factor(q: &DMatrix<f64>) -> DMatrix<f64> {
    let n = q.nrows();
    let s: Vec<f64> = (0..n).map(|i| q[(i, i)].max(0.0).sqrt()).collect();
    let mut r = q.clone();
    for i in 0..n {
        for j in 0..n {
            let d = s[i] * s[j];
            r[(i, j)] = if d > 0.0 { q[(i, j)] / d } else { 0.0 };
        }
    }
    let eig = SymmetricEigen::new(r);
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 1e-13 * top).collect();
    let mut l = DMatrix::zeros(n, keep.len().max(1));
    for (c, &e) in keep.iter().enumerate() {
        let root = eig.eigenvalues[e].sqrt();
        for i in 0..n {
            l[(i, c)] = s[i] * eig.eigenvectors[(i, e)] * root;
        }
    }
    l
}

/// `(Phi, Q)` of `ds = A s dt + B dW` over `dt`.
pub fn discretize(a: &DMatrix<f64>, b: &DMatrix<f64>, dt: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let norm = a.iter().map(|v| v.abs()).fold(0.0, f64::max) * n as f64 * dt;
    let doublings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let h = dt / 2f64.powi(doublings as i32);
    let bbt = b * b.transpose();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&(-a * h));
    m.view_mut((0, n), (n, n)).copy_from(&(&bbt * h));
    m.view_mut((n, n), (n, n)).copy_from(&(a.transpose() * h));
    let e = m.exp();
    let mut phi = e.view((n, n), (n, n)).transpose();
    let mut q = &phi * e.view((0, n), (n, n));
    for _ in 0..doublings {
        q = &phi * &q * phi.transpose() + &q;
        phi = &phi * &phi;
    }
    let q = (&q + q.transpose()) * 0.5;
    (phi, q)
}

impl Integrator for ExactIntegrator {
    fn name(&self) -> &str {
        "exact"
    }

    fn prepare(&self, sde: &LinearSde, dt: f64) -> Result<Box<dyn Stepper>> {
        check_stable(&sde.a)?;
        let (n, p) = (sde.states(), sde.outputs());
        let mut aa = DMatrix::zeros(n + p, n + p);
        aa.view_mut((0, 0), (n, n)).copy_from(&sde.a);
        aa.view_mut((n, 0), (p, n)).copy_from(&sde.c);
        let mut bb = DMatrix::zeros(n + p, sde.channels());
        bb.view_mut((0, 0), (n, sde.channels())).copy_from(&sde.b);
        bb.view_mut((n, 0), (p, sde.channels())).copy_from(&sde.d);
        let (phi, q) = discretize(&aa, &bb, dt);
        let l = psd_factor(&q);
        let f = phi.view((0, 0), (n, n)).into_owned();
        let h = phi.view((n, 0), (p, n)).into_owned();
        let g = l.rows(0, n).into_owned();
        let k = l.rows(n, p).into_owned();
        Ok(Box::new(LinearStepper::new(&f, &g, &h, &k, 1.0 / dt)))
    }
}

impl Integrator for EulerIntegrator {
    fn name(&self) -> &str {
        "euler"
    }

    fn prepare(&self, sde: &LinearSde, dt: f64) -> Result<Box<dyn Stepper>> {
        check_stable(&sde.a)?;
        // The explicit map I + A dt must itself be contractive.
        let n = sde.states();
        let f = DMatrix::identity(n, n) + &sde.a * dt;
        let radius = f.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
        if radius >= 1.0 {
            let worst = sde
                .a
                .complex_eigenvalues()
                .iter()
                .copied()
                .max_by(|x, y| (1.0 + x * dt).norm().total_cmp(&(1.0 + y * dt).norm()))
                .expect("non-empty drift");
            return Err(Error::UnstableSystem {
                re: worst.re,
                im: worst.im,
            });
        }
        let root = dt.sqrt();
        let g = &sde.b * root;
        // y = C x + D dW / dt, so that the white part keeps its level
        let h = &sde.c * dt;
        let k = &sde.d * root;
        Ok(Box::new(LinearStepper::new(&f, &g, &h, &k, 1.0 / dt)))
    }
}

type Factory = Arc<dyn Fn() -> Box<dyn Integrator> + Send + Sync>;

/// Integrators registered by name.
#[derive(Clone)]
pub struct IntegratorRegistry {
    factories: BTreeMap<String, Factory>,
}

impl Default for IntegratorRegistry {
    fn default() -> Self {
        let mut r = Self {
            factories: BTreeMap::new(),
        };
        r.register("exact", || Box::new(ExactIntegrator));
        r.register("euler", || Box::new(EulerIntegrator));
        r
    }
}

impl IntegratorRegistry {
    pub fn register<F>(&mut self, name: &str, f: F)
    where
        F: Fn() -> Box<dyn Integrator> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_string(), Arc::new(f));
    }

    pub fn create(&self, name: &str) -> Result<Box<dyn Integrator>> {
        self.factories
            .get(name)
            .map(|f| f())
            .ok_or_else(|| Error::invalid("oracle.integrator", format!("unknown integrator `{name}`; known: {:?}", self.names())))
    }

    pub fn names(&self) -> Vec<String> {
        self.factories.keys().cloned().collect()
    }
}

pub fn by_name(name: &str) -> Result<Box<dyn Integrator>> {
    IntegratorRegistry::default().create(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_ou_discretisation() {
        let g = 3.0;
        let s = 0.7;
        let a = DMatrix::from_element(1, 1, -g);
        let b = DMatrix::from_element(1, 1, s);
        let dt = 5.0;
        let (phi, q) = discretize(&a, &b, dt);
        assert!((phi[(0, 0)] - (-g * dt).exp()).abs() < 1e-14);
        let exact = s * s / (2.0 * g) * (1.0 - (-2.0 * g * dt).exp());
        assert!((q[(0, 0)] / exact - 1.0).abs() < 1e-12, "{} vs {exact}", q[(0, 0)]);
    }

    #[test]
    fn box_average_of_ou() {
        // integrated OU: Var(int_0^dt x) with x stationary is analytic; the
        // increment from x = 0 has the variance of the driven part only
        let (g, s, dt) = (2.0, 1.0, 0.3);
        let mut a = DMatrix::zeros(2, 2);
        a[(0, 0)] = -g;
        a[(1, 0)] = 1.0;
        let mut b = DMatrix::zeros(2, 1);
        b[(0, 0)] = s;
        let (_, q) = discretize(&a, &b, dt);
        let e = (-g * dt).exp();
        let var_int = s * s / (g * g) * (dt - 2.0 * (1.0 - e) / g + (1.0 - e * e) / (2.0 * g));
        assert!((q[(1, 1)] / var_int - 1.0).abs() < 1e-9, "{} vs {var_int}", q[(1, 1)]);
    }

    #[test]
    fn factor_reproduces_rank_deficient_covariance() {
        let v = DMatrix::from_row_slice(3, 1, &[1.0, 2.0, -1.0]);
        let q = &v * v.transpose() * 1e6;
        let l = psd_factor(&q);
        assert_eq!(l.ncols(), 1);
        assert!((&l * l.transpose() - &q).norm() < 1e-6);
    }

    #[test]
    fn unstable_drift_is_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[0.1, 1.0, -1.0, 0.1]);
        assert!(matches!(check_stable(&a), Err(Error::UnstableSystem { .. })));
    }

    #[test]
    fn registry_names() {
        assert_eq!(IntegratorRegistry::default().names(), vec!["euler", "exact"]);
        assert!(by_name("rk4").is_err());
    }
}
