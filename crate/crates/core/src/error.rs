use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("r = {r} is outside the profile domain [{lo}, {hi}]")]
    OutOfDomain { r: f64, lo: f64, hi: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("design failure: {0}")]
    DesignFailure(String),

    #[error("infeasible parameters: constraint `{constraint}` violated ({detail})")]
    InfeasibleParams { constraint: String, detail: String },

    #[error("singular evaluation: {0}")]
    Singular(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Singular(_) | Error::DesignFailure(_))
    }
}
