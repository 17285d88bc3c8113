//! Ornstein-Uhlenbeck process with `<x(t) x(t')> = Γ γ exp(-γ |t - t'|)`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuProcess {
    pub strength: f64,
    pub bandwidth: f64,
    pub state: f64,
}

impl OuProcess {
    pub fn new(strength: f64, bandwidth: f64) -> Self {
        Self {
            strength,
            bandwidth,
            state: 0.0,
        }
    }

    pub fn variance(&self) -> f64 {
        self.strength * self.bandwidth
    }

    /// Exact update over `dt` given a standard normal draw.
    pub fn step(&mut self, dt: f64, gauss: f64) -> f64 {
        let decay = (-self.bandwidth * dt).exp();
        let kick = (self.variance() * (1.0 - decay * decay)).sqrt();
        self.state = self.state * decay + kick * gauss;
        self.state
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn zero_strength_decays() {
        let mut p = OuProcess::new(0.0, 3.0);
        p.state = 2.0;
        for _ in 0..10 {
            p.step(0.5, 1.0);
        }
        assert!((p.state - 2.0 * (-15.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn stationary_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut p = OuProcess::new(2.0, 50.0);
        p.state = StandardNormal.sample(&mut rng);
        p.state *= p.variance().sqrt();
        let n = 1_000_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let x = p.step(0.01, StandardNormal.sample(&mut rng));
            acc += x * x;
        }
        let var = acc / n as f64;
        assert!((var / p.variance() - 1.0).abs() < 0.01, "{var}");
    }
}
