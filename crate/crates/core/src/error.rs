use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the model, the spectral engine and the estimation tools.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParams { key: String, reason: String },

    #[error("dressed susceptibility of membrane {membrane} has a pole at omega = {omega:.6e} rad/s")]
    Pole { membrane: usize, omega: f64 },

    #[error("steady state did not converge after {iterations} iterations ({} candidate branch(es) found)", branches.len())]
    Convergence {
        iterations: usize,
        branches: Vec<[f64; 2]>,
    },

    #[error("steady state is multistable: {} distinct branches found", branches.len())]
    Bistable { branches: Vec<[f64; 2]> },

    #[error("linear system is singular at omega = {omega:.6e} rad/s (condition number {cond:.3e})")]
    SingularSystem { omega: f64, cond: f64 },

    #[error("unsupported detection port: mode {mode}, mirror {mirror}")]
    UnsupportedPort { mode: usize, mirror: usize },

    #[error("unknown solver `{0}`")]
    UnknownSolver(String),

    #[error("window centered at {center:.6e} rad/s is too coarse: spacing {spacing:.3e} exceeds {limit:.3e}")]
    WindowTooCoarse { center: f64, spacing: f64, limit: f64 },

    #[error("fit did not converge after {iterations} iterations (cost {cost:.6e})")]
    NoConvergence {
        iterations: usize,
        cost: f64,
        best: Vec<f64>,
    },

    #[error("degenerate fit window: {0}")]
    DegenerateWindow(String),

    #[error("record too short for lock-in settling: {duration:.3e} s < {required:.3e} s")]
    InsufficientSettling { duration: f64, required: f64 },

    #[error("division by zero in calibration: {0} must be positive")]
    DivisionByZero(&'static str),

    #[error("series of {len} samples is shorter than one segment of {segment}")]
    TooShortSeries { len: usize, segment: usize },

    #[error("drift matrix is unstable: eigenvalue {re:.6e} + {im:.6e}i")]
    UnstableSystem { re: f64, im: f64 },

    #[error("config error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParams {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// Distinguishes user-input problems from numerical failures (CLI exit codes).
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParams { .. }
                | Error::Config { .. }
                | Error::UnsupportedPort { .. }
                | Error::UnknownSolver(_)
                | Error::WindowTooCoarse { .. }
                | Error::InsufficientSettling { .. }
                | Error::TooShortSeries { .. }
                | Error::DivisionByZero(_)
        )
    }
}
