use thiserror::Error;

/// Errors raised anywhere in the simulation chain.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("outside model regime: {0}")]
    OutOfRegime(String),

    #[error("Bessel truncation order {order} leaves residue {residue:.3e}; use at least {suggested}")]
    Truncation {
        order: usize,
        residue: f64,
        suggested: usize,
    },

    #[error("numerical accuracy violated: {0}")]
    Accuracy(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("not detectable within search bracket: {0}")]
    NotDetectable(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("unknown config key `{key}` (line {line})")]
    UnknownKey { key: String, line: usize },

    #[error("malformed data: {0}")]
    Data(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    /// Short machine-readable category used by the CLI.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::OutOfRegime(_) => "out-of-regime",
            Error::Truncation { .. } => "truncation",
            Error::Accuracy(_) => "accuracy",
            Error::NonFinite(_) => "non-finite",
            Error::NotDetectable(_) => "not-detectable",
            Error::Config { .. } => "config",
            Error::UnknownKey { .. } => "unknown-key",
            Error::Data(_) => "data",
            Error::Io(_) => "io",
        }
    }

    /// Process exit code: 2 for configuration problems, 3 for numeric or
    /// regime failures, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::UnknownKey { .. } | Error::InvalidParameter { .. } => 2,
            Error::Io(_) | Error::Data(_) => 4,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
            _ => Error::Data(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Data(e.to_string())
    }
}

/// Fails with `InvalidParameter` unless `value` is finite and satisfies `ok`.
pub(crate) fn check(name: &str, value: f64, ok: bool, reason: &str) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::invalid(name, format!("must be finite, got {value}")));
    }
    if !ok {
        return Err(Error::invalid(name, format!("{reason}, got {value}")));
    }
    Ok(())
}
