use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("chart mismatch: expected `{expected}`, found `{found}`")]
    ChartMismatch { expected: String, found: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("identity used as definition, residual undefined: {0}")]
    ResidualUndefined(String),

    #[error("reference forcing cannot be fitted: worst residual {residual:.3e} at t = {time}")]
    Unfittable { time: f64, residual: f64 },

    #[error("conic parameterization infeasible: residual {residual:.3e} at t = {time}; augment the generator list")]
    ConicInfeasible { time: f64, residual: f64 },

    #[error("structural error: {0}")]
    Structure(String),

    #[error("missing hypothesis: {0}")]
    Hypothesis(String),

    #[error("integration failed at t = {time}: {reason}")]
    Integration { time: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
