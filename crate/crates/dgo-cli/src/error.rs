//! Input-side failures. Every variant exits with code 2; mathematical
//! failures never pass through here (they stay inside the report and
//! exit with code 1).

use std::fmt;

use crate::expr::ExprError;
use crate::model::ModelError;

#[derive(Debug)]
pub enum CliError {
    /// A command/model mismatch, a bad flag value, or a malformed seed.
    Usage(String),
    /// The model file could not be read at all.
    Io { path: String, message: String },
    /// The model file was read but rejected by the format.
    Model { path: String, error: ModelError },
    /// An expression argument did not parse or used a foreign variable.
    Expr {
        what: &'static str,
        error: ExprError,
    },
}

impl CliError {
    /// The short category echoed in front of every message, so scripts can
    /// classify failures without parsing prose.
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Model { error, .. } => error.kind.category(),
            CliError::Expr { .. } => "parse",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(out, "input error ({}): ", self.category())?;
        match self {
            CliError::Usage(message) => write!(out, "{message}"),
            CliError::Io { path, message } => write!(out, "{path}: {message}"),
            CliError::Model { path, error } => write!(out, "{path}: {error}"),
            CliError::Expr { what, error } => write!(out, "{what}: {error}"),
        }
    }
}

impl std::error::Error for CliError {}
