use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("missing payment entry: {0}")]
    MissingPaymentEntry(String),

    #[error("{what} has {size} states, over the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        size: String,
        cap: u64,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid_game(msg: impl Into<String>) -> Self {
        Error::InvalidGame(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
