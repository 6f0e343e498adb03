use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid law: {0}")]
    InvalidLaw(String),
    #[error("index {index} outside window [{lo}, {hi}]")]
    OutOfWindow { index: i64, lo: i64, hi: i64 },
    #[error("formula mode needs a skip-free law")]
    NotSkipFree,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("vertices are incomparable within the stored tree")]
    Incomparable,
    #[error("ball of radius {radius} is not resolved at vertex {vertex}")]
    UnresolvedBall { vertex: usize, radius: usize },
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("succession window censored at index {index}")]
    CensoredWindow { index: i64 },
    #[error("tree is not finite and fully resolved")]
    NotFinite,
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
