//! Subcommand failure type: what broke, and which exit code reports it.

use std::fmt;

/// Failure classes of the command-line contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Invalid configuration, flags, or parameter combination (exit 2).
    Config,
    /// Unreadable, unparseable, or malformed input data (exit 3).
    Data,
    /// A numerical step failed on otherwise valid inputs (exit 4).
    Numerical,
}

impl ErrorKind {
    fn as_str(self) -> &'static str {
        match self {
            Self::Config => "config",
            Self::Data => "data",
            Self::Numerical => "numerical",
        }
    }
}

/// A failed subcommand: a failure class plus a human-readable message.
///
/// Rendered to stderr as a one-line JSON object so scripted callers can
/// match on `error.kind` instead of scraping text.
#[derive(Debug)]
pub struct CliError {
    kind: ErrorKind,
    message: String,
}

impl CliError {
    pub fn config(message: impl fmt::Display) -> Self {
        Self {
            kind: ErrorKind::Config,
            message: message.to_string(),
        }
    }

    pub fn data(message: impl fmt::Display) -> Self {
        Self {
            kind: ErrorKind::Data,
            message: message.to_string(),
        }
    }

    pub fn numerical(message: impl fmt::Display) -> Self {
        Self {
            kind: ErrorKind::Numerical,
            message: message.to_string(),
        }
    }

    /// Process exit code reporting this failure.
    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Numerical => 4,
        }
    }

    /// The `{"error": ...}` object printed to stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": {
                "kind": self.kind.as_str(),
                "message": self.message,
            }
        })
        .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.as_str(), self.message)
    }
}

impl std::error::Error for CliError {}
