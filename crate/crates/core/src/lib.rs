//! Noise spectra of a two-membrane optomechanical cavity driven by two noisy lasers.
//!
//! The crate computes output-quadrature spectra from the linearised Langevin
//! equations, reproduces the amplitude/phase noise calibration chain, fits
//! couplings and Lorentzian peaks, and cross-checks the analytic spectra with
//! a time-domain stochastic simulation.

pub mod acceptance;
pub mod calibration;
pub mod config;
pub mod error;
pub mod fitting;
pub mod model;
pub mod noise;
pub mod oracle;
pub mod presets;
pub mod recipes;
pub mod spectra;
pub mod units;

pub use error::{Error, Result};
