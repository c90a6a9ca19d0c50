use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate doublet: zero magnetic field leaves the eigenbasis undefined")]
    DegenerateDoublet,

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("empty record")]
    EmptyRecord,

    #[error("cyclicity-limited regime invalid: eta*C = {0} <= 1")]
    CyclicityLimited(f64),

    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("fit failure: {0}")]
    FitFailure(String),

    #[error("model returned a non-finite value at parameters {params:?}")]
    NonFiniteModel { params: Vec<f64> },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
