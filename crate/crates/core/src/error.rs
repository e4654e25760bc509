use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Requested object would exceed a hard size budget.
    #[error("capacity exceeded: {what} (limit {limit}, requested {requested})")]
    Capacity {
        what: &'static str,
        limit: usize,
        requested: usize,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A numeric parameter is outside its valid domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A crossbar was asked to hold a value other than -1 or +1.
    #[error("cannot program crossbar cell ({row}, {col}) with {value}; cells hold -1 or +1")]
    Programming { row: usize, col: usize, value: i64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
