use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("fit failure: {0}")]
    Fit(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Fit(_) => 4,
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 1,
        }
    }

    /// Library errors raised while running (not while validating).
    pub fn from_core(e: cqec_core::Error) -> Self {
        match e {
            cqec_core::Error::FitNonConvergence { .. } => CliError::Fit(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}
