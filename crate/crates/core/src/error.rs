use thiserror::Error;

pub type Result<T> = std::result::Result<T, SmartcdError>;

#[derive(Debug, Error)]
pub enum SmartcdError {
    #[error("invalid block partition: {0}")]
    InvalidPartition(String),

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("block {block} has zero curvature (L_hat = 0 and ||A_i|| = 0)")]
    ZeroCurvature { block: usize },

    #[error("iterates diverged (nonfinite value) at iteration {iteration}")]
    Diverged { iteration: usize },

    #[error("degenerate convex combination at iteration {iteration}: c_k = 0 with nonzero coefficient")]
    DegenerateCombination { iteration: usize },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: label {label:?} cannot be mapped to +1/-1")]
    Label { line: usize, label: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(SmartcdError::DimensionMismatch {
            what,
            expected,
            got,
        })
    }
}
