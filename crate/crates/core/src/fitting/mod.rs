//! Parameter estimation on spectra: Lorentzian peaks and optomechanical couplings.

pub mod couplings;
pub mod lm;
pub mod lorentz;

use serde::{Deserialize, Serialize};

pub use couplings::{fit_couplings, CouplingFitOptions};
pub use lm::{levenberg_marquardt, LmOptions, LmOutcome};
pub use lorentz::{fit_lorentzians, LorentzianPeak};

/// Raised (as a report entry, not an error) when the data do not constrain a parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifiabilityWarning {
    pub parameter: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub names: Vec<String>,
    pub estimates: Vec<f64>,
    /// One-sigma uncertainties from the Gauss-Newton covariance.
    pub uncertainties: Vec<f64>,
    pub residual_norm: f64,
    pub cost: f64,
    pub converged: bool,
    pub iterations: usize,
    pub warnings: Vec<IdentifiabilityWarning>,
}

impl FitReport {
    pub fn from_outcome(names: Vec<String>, out: &LmOutcome) -> Self {
        Self {
            names,
            estimates: out.params.clone(),
            uncertainties: out.uncertainties(),
            residual_norm: out.residual_norm(),
            cost: out.cost,
            converged: true,
            iterations: out.iterations,
            warnings: Vec::new(),
        }
    }

    pub fn get(&self, name: &str) -> Option<(f64, f64)> {
        let i = self.names.iter().position(|n| n == name)?;
        Some((self.estimates[i], self.uncertainties[i]))
    }

    /// `key=value` pairs for CSV output.
    pub fn pairs(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("converged".to_string(), self.converged.to_string()),
            ("iterations".to_string(), self.iterations.to_string()),
            ("cost".to_string(), format!("{:e}", self.cost)),
            ("residual_norm".to_string(), format!("{:e}", self.residual_norm)),
        ];
        for (i, n) in self.names.iter().enumerate() {
            out.push((n.clone(), format!("{:e}", self.estimates[i])));
            out.push((format!("{n}_sigma"), format!("{:e}", self.uncertainties[i])));
        }
        for w in &self.warnings {
            out.push((format!("warning_{}", w.parameter), w.reason.clone()));
        }
        out
    }
}
