use alloc::string::String;
use core::fmt;

/// Broad category of a failure, stable for machine-readable reporting.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Domain,
    TooClose,
    Degenerate,
    Quadrature,
    Continuation,
    RuleValidation,
    Solver,
    SizeExceeded,
}

impl ErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Validation => "validation",
            ErrorKind::Domain => "domain",
            ErrorKind::TooClose => "too_close",
            ErrorKind::Degenerate => "degenerate",
            ErrorKind::Quadrature => "quadrature",
            ErrorKind::Continuation => "continuation",
            ErrorKind::RuleValidation => "rule_validation",
            ErrorKind::Solver => "solver",
            ErrorKind::SizeExceeded => "size_exceeded",
        }
    }
}

/// Error carrying the operation that raised it.
#[derive(Clone, Debug, PartialEq)]
pub struct Error {
    pub kind: ErrorKind,
    pub op: &'static str,
    pub detail: String,
}

impl Error {
    pub fn new(kind: ErrorKind, op: &'static str, detail: impl Into<String>) -> Self {
        Self { kind, op, detail: detail.into() }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error in {}: {}", self.kind.as_str(), self.op, self.detail)
    }
}

pub type Result<T> = core::result::Result<T, Error>;
