use thiserror::Error;

/// A failed run; the exit status is fixed by the variant.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration, input file or output location: exit 1.
    #[error("{key}: {message}")]
    Validation { key: String, message: String },
    /// Valid input whose numerics failed, e.g. an unachievable tolerance: exit 2.
    #[error("{key}: {message}")]
    Numeric { key: String, message: String },
    /// A corpus run completed but some job failed its checks: exit 3.
    #[error("audit failed: {0}")]
    Audit(String),
}

impl CliError {
    pub fn validation(key: impl Into<String>, message: impl ToString) -> Self {
        CliError::Validation {
            key: key.into(),
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => 1,
            CliError::Numeric { .. } => 2,
            CliError::Audit(_) => 3,
        }
    }
}

/// Attaches the config key a core error came from.
pub trait Keyed<T> {
    fn key(self, key: &str) -> Result<T, CliError>;
}

impl<T> Keyed<T> for dcq_core::Result<T> {
    fn key(self, key: &str) -> Result<T, CliError> {
        self.map_err(|e| {
            let (key, message) = (key.to_string(), e.to_string());
            if e.is_numeric() {
                CliError::Numeric { key, message }
            } else {
                CliError::Validation { key, message }
            }
        })
    }
}

impl<T> Keyed<T> for Result<T, String> {
    fn key(self, key: &str) -> Result<T, CliError> {
        self.map_err(|m| CliError::validation(key, m))
    }
}
