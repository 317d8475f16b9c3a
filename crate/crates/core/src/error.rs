use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite input: {0}")]
    NonFiniteInput(String),

    #[error(
        "singular gramian: min eigenvalue {min_eigenvalue:e} is below tolerance {tolerance:e}"
    )]
    SingularGramian { min_eigenvalue: f64, tolerance: f64 },

    #[error("degenerate witness: discrepancy value is zero, witness function undefined")]
    DegenerateWitness,

    #[error("degenerate direction {index}: eigenvalue {eigenvalue:e} is below tolerance {tolerance:e}")]
    DegenerateDirection {
        index: usize,
        eigenvalue: f64,
        tolerance: f64,
    },

    #[error("unsupported dimension {0}: grid tabulation supports d in {{1, 2}}")]
    UnsupportedDimension(usize),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 0 ok, 1 validation failure,
    /// 2 input error, 3 numerical singularity.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SingularGramian { .. } => 3,
            _ => 2,
        }
    }
}
