use thiserror::Error;

/// Malformed textual input (numbers, exponents, metric files).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message}")]
pub struct ParseError {
    pub message: String,
}

impl ParseError {
    pub fn new(message: impl Into<String>) -> Self {
        ParseError { message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("evaluation overflowed at exponent {exponent}")]
    Overflow { exponent: String },
    #[error("non-finite coefficient produced by {0}")]
    NonFinite(&'static str),
    #[error("z = {z} is outside the domain {domain}")]
    OutOfDomain { z: f64, domain: String },
    #[error("conformal factor is not positive at z = {z} (C = {value})")]
    SingularConformal { z: f64, value: f64 },
    #[error("profile vanishes at z = {z}")]
    SingularProfile { z: f64 },
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("metric is not Kähler for the requested structure: {0}")]
    NotKahler(String),
    #[error("singular linear solve for {what} (coefficient {coefficient:e})")]
    SingularSystem { what: &'static str, coefficient: f64 },
    #[error("root bracket [{a}, {b}] does not straddle a sign change")]
    Bracket { a: f64, b: f64 },
    #[error("rank-deficient least-squares design ({0})")]
    RankDeficient(String),
    #[error("unknown catalog entry `{0}`")]
    UnknownMetric(String),
    #[error("parameter `{name}`: {reason}")]
    BadParameter { name: String, reason: String },
    #[error("integrand undefined: {0}")]
    Integrand(String),
    #[error("search failed: {0}")]
    SearchFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
