use sti_core::{CoefficientError, StiError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("analysis failed: {0}")]
    Analysis(#[from] StiError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Analysis(_) => 3,
        }
    }
}

impl From<CoefficientError> for CliError {
    fn from(e: CoefficientError) -> Self {
        match e {
            CoefficientError::Io(m) => CliError::Io(m),
            other => CliError::Usage(format!("coefficient file: {other}")),
        }
    }
}

pub(crate) fn io_error(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}
