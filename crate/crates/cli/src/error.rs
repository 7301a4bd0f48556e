use serde_json::json;

/// Errors reported by the command layer, each with a fixed exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{message}")]
    Validation { key: Option<String>, message: String },

    #[error(transparent)]
    Runtime(field_slln::Error),

    #[error("{0}")]
    Comparison(String),
}

impl CliError {
    pub fn validation(key: Option<&str>, message: impl Into<String>) -> Self {
        CliError::Validation {
            key: key.map(str::to_string),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => 1,
            CliError::Runtime(_) => 2,
            CliError::Comparison(_) => 3,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Validation { .. } => "validation",
            CliError::Runtime(_) => "runtime",
            CliError::Comparison(_) => "comparison",
        }
    }

    pub fn key(&self) -> Option<&str> {
        match self {
            CliError::Validation { key, .. } => key.as_deref(),
            _ => None,
        }
    }

    /// Single-line JSON form for the error stream.
    pub fn to_json_line(&self) -> String {
        json!({
            "error": self.code(),
            "exit_code": self.exit_code(),
            "key": self.key(),
            "message": self.to_string(),
        })
        .to_string()
    }
}

impl From<field_slln::Error> for CliError {
    fn from(e: field_slln::Error) -> Self {
        match e {
            field_slln::Error::Domain { param, reason } => CliError::Validation {
                key: Some(param.to_string()),
                message: format!("`{param}`: {reason}"),
            },
            e if e.is_runtime() => CliError::Runtime(e),
            e => CliError::Validation {
                key: None,
                message: e.to_string(),
            },
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}
