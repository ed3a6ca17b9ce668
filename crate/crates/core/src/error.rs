use std::fmt;

/// Errors raised by the similarity model, the engines, and matrix I/O.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("vector length mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("binary vectors must have at least one element")]
    EmptyVector,

    #[error("non-binary value {value} at position {index}")]
    NonBinary { index: usize, value: String },

    #[error("m = {m} exceeds the exact-engine cap of {cap}")]
    ResourceGuard { m: usize, cap: usize },

    #[error("degenerate occurrence probabilities: {0}")]
    Degenerate(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("{0}")]
    Parse(ParseError),

    #[error("pair ({label_i}, {label_j}): {source}")]
    Pair {
        label_i: String,
        label_j: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for user-input problems (bad files, bad flags, mismatched vectors).
    pub fn is_validation(&self) -> bool {
        match self {
            Error::ResourceGuard { .. } => false,
            Error::Pair { source, .. } => source.is_validation(),
            _ => true,
        }
    }

    /// True when a resource guard (m cap) rejected the request.
    pub fn is_resource_guard(&self) -> bool {
        match self {
            Error::ResourceGuard { .. } => true,
            Error::Pair { source, .. } => source.is_resource_guard(),
            _ => false,
        }
    }
}

/// Location-aware matrix parsing failure. Rows and columns are 1-based and
/// refer to positions in the input file.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
