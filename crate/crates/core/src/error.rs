use thiserror::Error;

/// Errors raised by shell construction, sampling and fitting.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShellError {
    #[error("spectrum needs at least 2 levels, got {0}")]
    TooFewLevels(usize),
    #[error("level {index} is not finite ({value})")]
    NonFiniteLevel { index: usize, value: f64 },
    #[error("levels must be strictly increasing: level {index} ({value}) <= previous ({previous})")]
    NonIncreasing {
        index: usize,
        value: f64,
        previous: f64,
    },
    #[error("levels must be distinct: level {index} repeats value {value}")]
    RepeatedLevel { index: usize, value: f64 },
    #[error("total energy {energy} lies outside the spectrum range [{lo}, {hi}]")]
    InfeasibleEnergy { energy: f64, lo: f64, hi: f64 },
    #[error("point is outside the energy shell: {0}")]
    InfeasiblePoint(String),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("operation requires {0}")]
    Unsupported(String),
    #[error("shell is degenerate (total energy {0} sits on a spectrum bound)")]
    DegenerateShell(f64),
    #[error("no finite inverse temperature reproduces energy {energy}")]
    NoFiniteBeta { energy: f64 },
    #[error("inverse temperature must be finite, got {0}")]
    NonFiniteBeta(f64),
    #[error("bisection stalled with residual {residual:e} above tolerance {tol:e}")]
    FitNotConverged { residual: f64, tol: f64 },
    #[error("sampler failure: {0}")]
    Sampler(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, ShellError>;
