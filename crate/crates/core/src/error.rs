use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("site has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("series diverges: {0}")]
    Divergent(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("requested tolerance {requested:e} unreachable (best error bound {achieved:e})")]
    ToleranceUnreachable { requested: f64, achieved: f64 },

    #[error("rejection sampling exhausted {attempts} attempts (empirical acceptance rate {rate:e})")]
    Infeasible { attempts: u64, rate: f64 },

    #[error("supercritical target density {target} exceeds the critical density {critical}; use the interlacement regime")]
    Supercritical { target: f64, critical: f64 },

    #[error("path does not intersect the window")]
    MissesWindow,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
