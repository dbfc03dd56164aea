use std::path::Path;

use serde::Serialize;
use vhp_core::Error;

pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_FORMAT: u8 = 2;
pub const EXIT_CAPACITY: u8 = 3;

/// Structured error printed to stderr as one JSON line.
#[derive(Debug, Serialize)]
pub struct Failure {
    #[serde(skip)]
    pub code: u8,
    pub error: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub position: Option<usize>,
}

impl Failure {
    pub fn validation(message: impl Into<String>) -> Self {
        Failure { code: EXIT_VALIDATION, error: "validation", message: message.into(), path: None, line: None, position: None }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_FORMAT, error: "usage", message: message.into(), path: None, line: None, position: None }
    }

    pub fn at(mut self, path: &Path) -> Self {
        self.path.get_or_insert_with(|| path.display().to_string());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).unwrap_or_else(|_| format!("{{\"error\":\"{}\"}}", self.error))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, error) = match &e {
            Error::Capacity { .. } => (EXIT_CAPACITY, "capacity"),
            Error::Format(_) | Error::Located { .. } => (EXIT_FORMAT, "format"),
            Error::Grammar(_) | Error::Vocab { .. } | Error::DescriptorLength { .. } => (EXIT_FORMAT, "format"),
            Error::Io(_) => (EXIT_FORMAT, "io"),
            _ => (EXIT_VALIDATION, "validation"),
        };
        let (line, position) = match &e {
            Error::Located { line, position, .. } => (Some(*line), *position),
            Error::Grammar(g) => (None, Some(g.position)),
            _ => (None, None),
        };
        Failure { code, error, message: e.to_string(), path: None, line, position }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

/// Attach a path to any error convertible into a [`Failure`].
pub trait AtPath<T> {
    fn at(self, path: &Path) -> Result<T, Failure>;
}

impl<T, E: Into<Failure>> AtPath<T> for Result<T, E> {
    fn at(self, path: &Path) -> Result<T, Failure> {
        self.map_err(|e| e.into().at(path))
    }
}
