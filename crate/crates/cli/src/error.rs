use std::fmt;

use smartcd::SmartcdError;

/// CLI failure with its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or arguments; the message names the key.
    Config(String),
    /// The solver produced nonfinite iterates.
    Diverged(String),
    /// Anything else: I/O, failed checks.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Failed(_) => 1,
            CliError::Diverged(_) => 2,
        }
    }

    /// Wraps a library error raised while running `context`.
    pub fn from_solver(context: &str, e: SmartcdError) -> Self {
        match e {
            SmartcdError::Diverged { .. } | SmartcdError::DegenerateCombination { .. } => {
                CliError::Diverged(format!("{context}: {e}"))
            }
            SmartcdError::Io(_) => CliError::Failed(format!("{context}: {e}")),
            _ => CliError::Config(format!("{context}: {e}")),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Diverged(m) => write!(f, "diverged: {m}"),
            CliError::Failed(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_error_kind() {
        let diverged = CliError::from_solver("run a", SmartcdError::Diverged { iteration: 7 });
        assert_eq!(diverged.exit_code(), 2);
        assert!(diverged.to_string().contains("run a"));
        let bad = CliError::from_solver("run a", SmartcdError::InvalidParameter("beta1".into()));
        assert_eq!(bad.exit_code(), 1);
        assert_eq!(CliError::Failed("x".into()).exit_code(), 1);
    }
}
