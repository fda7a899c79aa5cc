use std::fmt;

use serde_json::json;

/// A failure that ends the process with a non-zero exit code and a single
/// JSON line on standard error.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Malformed input or an invalid flag combination (exit 2).
    Invalid(String),
    /// Input outside the support of the model (exit 3).
    Domain { message: String, replicate: Option<usize> },
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self::Invalid(message.into())
    }

    pub fn at_replicate(self, replicate: usize) -> Self {
        match self {
            Self::Domain { message, replicate: None } => Self::Domain { message, replicate: Some(replicate) },
            other => other,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Invalid(_) => 2,
            Self::Domain { .. } => 3,
        }
    }

    pub fn to_json_line(&self) -> String {
        let value = match self {
            Self::Invalid(message) => json!({ "error": { "kind": "invalid_input", "message": message } }),
            Self::Domain { replicate, .. } => json!({
                "error": { "kind": "domain", "message": self.to_string(), "replicate": replicate }
            }),
        };
        value.to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Invalid(message) => f.write_str(message),
            Self::Domain { message, replicate: Some(r) } => write!(f, "replicate {r}: {message}"),
            Self::Domain { message, replicate: None } => f.write_str(message),
        }
    }
}

impl std::error::Error for CliError {}

impl From<multimatrix::Error> for CliError {
    fn from(e: multimatrix::Error) -> Self {
        use multimatrix::Error::*;
        match e {
            Shape(_) | InvalidRoles(_) => Self::Invalid(e.to_string()),
            NotPositiveDefinite
            | NotSymmetric
            | NonFinite { .. }
            | Domain(_)
            | NegativeArgument(_)
            | QuadratureFailure { .. }
            | DegenerateBlock(_) => Self::Domain { message: e.to_string(), replicate: None },
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Invalid(format!("invalid JSON: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
