use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid alphabet size {0}: need at least 2 symbols")]
    InvalidAlphabet(usize),

    #[error("model error: {0}")]
    Model(String),

    #[error("value outside the map domain [0,1): {0}")]
    Domain(String),

    #[error("key error: {0}")]
    Key(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("decode error at position {position}: {reason}")]
    Decode { position: usize, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("capacity exhausted: {0}")]
    Capacity(String),

    #[error("unknown key wrapping scheme {0:#04x}")]
    UnknownScheme(u8),

    #[error("wrapped key failed authentication")]
    Authentication,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Format(_) | Error::Json(_) => 2,
            Error::Key(_) | Error::UnknownScheme(_) | Error::Authentication => 3,
            Error::Capacity(_) => 4,
            _ => 1,
        }
    }
}
