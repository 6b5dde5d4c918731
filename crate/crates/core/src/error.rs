use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("candidate is not in the {expected} of the current source")]
    WrongArea { expected: &'static str },

    #[error("number of sub-areas must be even and at least 2, got {0}")]
    InvalidSubAreaCount(usize),

    #[error("constellation size {0} is not a perfect square >= 4")]
    InvalidConstellation(u32),

    #[error("degenerate relay weights: A^2 + B = 0")]
    DegenerateWeights,

    #[error("duplicate node id {0}")]
    DuplicateNode(usize),

    #[error("non-finite coordinate for node {0}")]
    NonFinitePosition(usize),

    #[error("radio range must be positive, got {0}")]
    InvalidRange(f64),

    #[error("unknown node {0}")]
    UnknownNode(usize),

    #[error("topology generation gave up after {0} resamples")]
    TopologyGenerationFailed(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{0}")]
    Config(#[from] ConfigError),
}

/// Problems in scenario files and command-line overrides.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("line {line}: expected `key = value`, got `{text}`")]
    Malformed { line: usize, text: String },

    #[error("key `{key}`: cannot parse `{value}`")]
    BadValue { key: String, value: String },

    #[error("key `{key}` given twice")]
    DuplicateKey { key: String },

    #[error("invalid scenario: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
