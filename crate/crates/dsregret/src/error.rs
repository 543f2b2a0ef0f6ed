use std::fmt;

/// Errors produced by parsers, constructors and solvers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Syntax or semantic error in an input file. `line`/`col` are 1-based;
    /// zero means the location is not tied to a single line.
    Parse { line: usize, col: usize, msg: String },
    /// A precondition violation: unknown vertex, missing edge, empty cycle,
    /// value out of range, and similar.
    Invalid(String),
    /// A computation was refused because the instance exceeds a size guard.
    TooLarge(String),
}

impl Error {
    pub(crate) fn at(line: usize, col: usize, msg: impl Into<String>) -> Error {
        Error::Parse { line, col, msg: msg.into() }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Error {
        Error::Invalid(msg.into())
    }

    pub(crate) fn too_large(msg: impl Into<String>) -> Error {
        Error::TooLarge(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parse { line: 0, msg, .. } => write!(f, "{msg}"),
            Error::Parse { line, col: 0, msg } => write!(f, "line {line}: {msg}"),
            Error::Parse { line, col, msg } => {
                write!(f, "line {line}, column {col}: {msg}")
            }
            Error::Invalid(msg) => write!(f, "{msg}"),
            Error::TooLarge(msg) => write!(f, "instance too large: {msg}"),
        }
    }
}

impl std::error::Error for Error {}
