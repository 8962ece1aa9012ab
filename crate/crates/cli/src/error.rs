use std::path::PathBuf;

/// Anything that makes the input unusable; always exit code 3.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error("protocol: {0}")]
    Protocol(String),
    #[error(transparent)]
    Core(#[from] hashcol_core::Error),
}

impl CliError {
    pub fn syntax(line: usize, message: impl Into<String>) -> Self {
        CliError::Syntax {
            line,
            message: message.into(),
        }
    }
}
