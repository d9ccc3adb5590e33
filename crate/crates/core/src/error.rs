use std::fmt;

use thiserror::Error;

/// Malformed concrete syntax. Lines and columns are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }
}

/// Arity or sort clash.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct SortError {
    pub message: String,
    pub at: Option<(usize, usize)>,
}

impl SortError {
    pub fn new(message: impl Into<String>) -> Self {
        SortError {
            message: message.into(),
            at: None,
        }
    }

    pub fn at(line: usize, col: usize, message: impl Into<String>) -> Self {
        SortError {
            message: message.into(),
            at: Some((line, col)),
        }
    }
}

impl fmt::Display for SortError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.at {
            Some((line, col)) => write!(f, "{line}:{col}: sort error: {}", self.message),
            None => write!(f, "sort error: {}", self.message),
        }
    }
}

/// Anything that can go wrong turning text into a formula or rule.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Sort(#[from] SortError),
}
