use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error(
        "vanishing denominator x*EQ^-1 x = {0:e}; the pair must be regular for the eigenvalue ratios to exist"
    )]
    VanishingDenominator(f64),

    #[error("infeasible region: {0}")]
    InfeasibleRegion(String),

    #[error("no strictly feasible starting point: {0}")]
    InfeasibleStart(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("zero reference pair: relative error undefined for E = A = 0")]
    ZeroReference,

    #[error("generator argument out of range: {0}")]
    OutOfRange(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
