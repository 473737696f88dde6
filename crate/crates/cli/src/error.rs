use std::path::PathBuf;

use thiserror::Error;

/// Exit status for a usage or configuration problem.
pub const EXIT_USAGE: u8 = 2;
/// Exit status for a numerical failure inside a computation.
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config key '{key}': {message}")]
    Config { key: String, message: String },

    #[error("{path}:{line}: {message}")]
    Input { path: PathBuf, line: u64, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] qmcmc_core::Error),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self::Usage(message.into())
    }

    pub fn config(key: &str, message: impl Into<String>) -> Self {
        Self::Config { key: key.to_string(), message: message.into() }
    }

    pub fn input(path: impl Into<PathBuf>, line: u64, message: impl Into<String>) -> Self {
        Self::Input { path: path.into(), line, message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// Process exit status: numerical failures map to 3, everything the user
    /// can fix by changing inputs maps to 2.
    pub fn exit_code(&self) -> u8 {
        use qmcmc_core::Error as E;
        match self {
            Self::Core(
                E::Numerical(_) | E::NotHermitian { .. } | E::AsymmetricProposal { .. } | E::NotReversible { .. },
            ) => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::usage("x").exit_code(), 2);
        assert_eq!(
            CliError::from(qmcmc_core::Error::SizeCap { n: 20, cap: 14, what: "dense operator" }).exit_code(),
            2
        );
        assert_eq!(CliError::from(qmcmc_core::Error::Numerical("nan".into())).exit_code(), 3);
        let e = CliError::input("a.csv", 7, "bad number");
        assert_eq!(e.to_string(), "a.csv:7: bad number");
    }
}
