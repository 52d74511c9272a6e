use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("invalid character {ch:?} at position {position}")]
    InvalidCharacter { ch: char, position: usize },
    #[error("symbol {symbol} at position {position} is outside an alphabet of size {alphabet}")]
    SymbolOutOfRange {
        symbol: usize,
        position: usize,
        alphabet: usize,
    },
    #[error("empty input: {0}")]
    Empty(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{0}")]
    NotNormalized(String),
    #[error("no path with positive weight")]
    NoFeasiblePath,
    #[error("enumeration of {count} items exceeds the cap of {cap}")]
    EnumerationCap { count: String, cap: usize },
    #[error("saturated distance between {pair}: 4k >= 3n (n = {n}, k = {k})")]
    Saturated { pair: String, n: usize, k: usize },
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unknown taxon {0:?}")]
    UnknownTaxon(String),
    #[error("taxon sets differ")]
    TaxaMismatch,
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn parse(offset: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            offset,
            message: message.into(),
        }
    }
}
