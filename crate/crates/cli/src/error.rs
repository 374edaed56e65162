use std::path::PathBuf;

use pom_lite::bench::BenchError;
use pom_lite::PomError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("malformed input {path}: {reason}")]
    Input { path: PathBuf, reason: String },
    #[error("cannot write {path}: {reason}")]
    Output { path: PathBuf, reason: String },
    #[error("{kind}: {0}", kind = .0.kind())]
    Estimator(PomError),
    #[error("{0}")]
    Bench(BenchError),
    #[error("{0}")]
    Mismatch(String),
    #[error("every row of the suite failed")]
    AllRowsFailed,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Input { .. } | CliError::Output { .. } => 2,
            CliError::Bench(BenchError::InvalidConfig(_) | BenchError::UnknownFamily(_)) => 2,
            CliError::Estimator(_) | CliError::Bench(_) | CliError::AllRowsFailed => 3,
            CliError::Mismatch(_) => 4,
        }
    }

    pub fn output(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Output { path: path.to_path_buf(), reason: e.to_string() }
    }
}

impl From<PomError> for CliError {
    fn from(e: PomError) -> Self {
        CliError::Estimator(e)
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        CliError::Bench(e)
    }
}
