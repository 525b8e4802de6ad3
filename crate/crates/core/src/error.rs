use thiserror::Error;

/// Errors raised by every ergokit operation.
///
/// The variants line up with the CLI exit codes: [`Error::Budget`] maps to 3,
/// [`Error::CheckFailed`] to 1, and everything else is a usage problem (2).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("symbol {symbol} out of range for alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: u8, alphabet: usize },

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("word {0} is not in the language")]
    NotInLanguage(String),

    #[error("word too short: need length {need}, got {got}")]
    TooShort { need: usize, got: usize },

    #[error("table horizon exceeded: requested {requested}, tabulated up to {horizon}")]
    Horizon { requested: usize, horizon: usize },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
