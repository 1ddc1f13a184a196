use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid register: {0}")]
    InvalidRegister(String),

    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NonHermitian(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("parameter `{name}` out of range: {value}")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("operation not supported: {0}")]
    Unsupported(String),

    #[error("step size underflow at t = {t:.6e} (h = {h:.3e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("positivity violated at t = {t:.6e}: minimum eigenvalue {min_eigenvalue:.3e}")]
    PositivityViolation { t: f64, min_eigenvalue: f64 },

    #[error("trace drifted to {trace:.12} at t = {t:.6e}")]
    TraceDrift { t: f64, trace: f64 },

    #[error("state left the symmetric manifold (expansion residual {0:.3e})")]
    ReducedResidual(f64),

    #[error("reduced coefficient has imaginary part {0:.3e}")]
    ImaginaryCoefficient(f64),

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("data must be strictly positive for a log-log fit")]
    NonPositiveData,

    #[error("no plateau detected for rate {rate} within horizon {horizon}")]
    NoPlateau { rate: f64, horizon: f64 },

    #[error("fit did not converge after {iterations} iterations (residual {residual:.3e})")]
    FitNonConvergence { iterations: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
