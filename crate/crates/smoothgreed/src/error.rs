use std::path::PathBuf;

use smoothgreed_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("certificate breach: {0}")]
    Breach(String),
    #[error("infeasible design: {0}")]
    Infeasible(String),
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 0 success, 2 certificate breach, 3 infeasible design, 4 bad input,
    /// 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Breach(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::BadInput(_) => 4,
            CliError::Io { .. } => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InfeasibleDesign(m) => CliError::Infeasible(m),
            CoreError::CertificateBreach(m) => CliError::Breach(m),
            other => CliError::BadInput(other.to_string()),
        }
    }
}
