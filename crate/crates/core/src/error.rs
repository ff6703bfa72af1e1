use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A rule, alpha or sieve configuration that cannot be built.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("range error: {what} = {value} outside [{min}, {max}]")]
    Range {
        what: &'static str,
        value: u64,
        min: u64,
        max: u64,
    },

    /// Violated precondition on an operation's arguments.
    #[error("input error: {0}")]
    Input(String),

    /// A certified bound could not be met at the available precision.
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("invariant failure: {0}")]
    Invariant(String),

    #[error("cache error: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn range(what: &'static str, value: u64, min: u64, max: u64) -> Self {
        Error::Range {
            what,
            value,
            min,
            max,
        }
    }
}
