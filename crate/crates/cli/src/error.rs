use gencontact::suite::SuiteError;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot write structure: {0}")]
    Serialize(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Suite(#[from] SuiteError),
}

impl CliError {
    /// 2 for usage, configuration and I/O problems, 1 when a check could
    /// not be carried out on the structure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Suite(SuiteError::UnknownCheck(_) | SuiteError::Missing { .. }) => 2,
            CliError::Suite(_) => 1,
            _ => 2,
        }
    }

    pub fn from_json(e: serde_json::Error) -> CliError {
        let mut message = e.to_string();
        if let Some(i) = message.rfind(" at line ") {
            message.truncate(i);
        }
        CliError::Json { line: e.line(), column: e.column(), message }
    }
}
