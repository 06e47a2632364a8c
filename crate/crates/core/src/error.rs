use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("enclosure bound overflowed to infinity")]
    Overflow,
    #[error("invalid enclosure: lo = {lo}, hi = {hi}")]
    InvalidBounds { lo: f64, hi: f64 },
    #[error("operation on an empty enclosure")]
    Empty,
    #[error("square root of an enclosure with negative lower bound {0}")]
    NegativeSqrt(f64),
    #[error("logarithm of non-positive value {0}")]
    NonPositiveLog(f64),
    #[error("derivative bound requested on an enclosure containing 0: [{lo}, {hi}]")]
    ContainsCritical { lo: f64, hi: f64 },
    #[error("invalid parameter interval [{lo}, {hi}]: need 0 < lo <= hi <= 2")]
    InvalidParameters { lo: f64, hi: f64 },
    #[error("invalid partition request: {0}")]
    InvalidPartition(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("brute-force cycle enumeration supports at most {max} vertices, got {got}")]
    TooManyVertices { max: usize, got: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
