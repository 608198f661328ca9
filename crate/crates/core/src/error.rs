use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("invalid index sequence: {0}")]
    InvalidIndices(String),

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("eigenvalue iteration did not converge after {iterations} sweeps (n = {n})")]
    NoConvergence { n: usize, iterations: usize },

    #[error("unsupported norm pair {from} -> {to}: {reason}")]
    UnsupportedNorm {
        from: &'static str,
        to: &'static str,
        reason: String,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}
