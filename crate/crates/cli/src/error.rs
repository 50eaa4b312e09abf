use std::fmt;

use fracpearson::Error;
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Numeric,
    Io,
}

#[derive(Debug, Clone)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
    pub best_estimate: Option<f64>,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Config,
            message: msg.into(),
            best_estimate: None,
        }
    }

    pub fn io(msg: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Io,
            message: msg.into(),
            best_estimate: None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Config | ErrorKind::Io => EXIT_CONFIG,
            ErrorKind::Numeric => EXIT_NUMERIC,
        }
    }

    pub fn to_json(&self) -> Value {
        let kind = match self.kind {
            ErrorKind::Config => "config",
            ErrorKind::Numeric => "numeric",
            ErrorKind::Io => "io",
        };
        json!({
            "error": {
                "kind": kind,
                "message": self.message,
                "exit_code": self.exit_code(),
                "best_estimate": self.best_estimate,
            }
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::Numeric { .. } => ErrorKind::Numeric,
            _ => ErrorKind::Config,
        };
        Self {
            kind,
            message: e.to_string(),
            best_estimate: e.best_estimate(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::io(e.to_string())
    }
}
