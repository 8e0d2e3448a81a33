use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-positive sample {value} at node {index}")]
    NonPositive { index: usize, value: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("projection leaves non-positive density")]
    ProjectionNonPositive,

    #[error("time step underflow after {halvings} halvings at t = {t}")]
    DtUnderflow { halvings: u32, t: f64 },

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("horizon exhausted before {0}")]
    HorizonExhausted(String),

    #[error("shooting seed too large: H reached {0}")]
    SeedTooLarge(f64),

    #[error("bracket failure: {0}")]
    BracketFailure(String),

    #[error("energy drift {drift:e} exceeds tolerance after refinement")]
    EnergyDrift { drift: f64 },

    #[error("symmetry violated: {0}")]
    Asymmetric(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for FlowError {
    fn from(e: std::io::Error) -> Self {
        FlowError::Io(e.to_string())
    }
}

pub type Result<T, E = FlowError> = std::result::Result<T, E>;
