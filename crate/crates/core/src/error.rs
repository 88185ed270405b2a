use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("parse error in {field}: {message}")]
    Parse { field: String, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    /// Carries the singular values so callers can see how close to full rank J was.
    #[error("rank-deficient Jacobian (rank {rank} < {required}, singular values {singular_values:?})")]
    RankDeficient {
        rank: usize,
        required: usize,
        singular_values: Vec<f64>,
    },

    #[error("capacity error: {0}")]
    Capacity(String),

    #[error("degenerate polytope: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::RankDeficient { .. } => 2,
            Error::Capacity(_) => 3,
            _ => 1,
        }
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension {
            what,
            expected,
            got,
        });
    }
    Ok(())
}
