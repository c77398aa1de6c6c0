use thiserror::Error;

/// Errors raised across the reconstruction pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} sites, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("expectation table is missing the string `{0}`")]
    IncompleteData(String),

    #[error("Gram matrix is not positive definite (offending eigenvalues: {eigenvalues:?})")]
    GramDegenerate { eigenvalues: Vec<f64> },

    #[error("Delta matrix is not positive definite (offending eigenvalues: {eigenvalues:?})")]
    DeltaNotPositive { eigenvalues: Vec<f64> },

    #[error("normalization plane is empty: every kernel term has zero expectation")]
    NormalizationDegenerate,

    #[error("semidefinite solver stopped with status {0}")]
    Solver(String),

    #[error("state is not faithful: smallest eigenvalue {0:e}")]
    NotFaithful(f64),

    #[error("parse error{}: {message}", on_line(*line))]
    Parse { line: usize, message: String },

    #[error("config error{}: {message}", on_line(*line))]
    Config { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

/// Line 0 means the position is unknown (overrides, in-memory values).
fn on_line(line: usize) -> String {
    if line == 0 {
        String::new()
    } else {
        format!(" on line {line}")
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Variant name, used as a compact label in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::Contract(_) => "Contract",
            Error::Resource(_) => "Resource",
            Error::IncompleteData(_) => "IncompleteData",
            Error::GramDegenerate { .. } => "GramDegenerate",
            Error::DeltaNotPositive { .. } => "DeltaNotPositive",
            Error::NormalizationDegenerate => "NormalizationDegenerate",
            Error::Solver(_) => "Solver",
            Error::NotFaithful(_) => "NotFaithful",
            Error::Parse { .. } => "Parse",
            Error::Config { .. } => "Config",
            Error::Io(_) => "Io",
        }
    }
}
