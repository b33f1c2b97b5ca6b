//! Crate-wide error type.

/// Errors returned by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input violated a precondition (wrong length, non-finite value, bad range).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A lagged feature or trailing window reached before the available history.
    #[error("insufficient history: {0}")]
    InsufficientHistory(String),

    /// A linear system could not be solved (e.g. all-zero feature column with no ridge).
    #[error("singular system: {0}")]
    SingularSystem(String),

    /// A model is degenerate for the requested operation (zero mean power, constant signal).
    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    /// A Kalman update failed (non-positive innovation variance).
    #[error("filter failure: {0}")]
    FilterFailure(String),

    /// The requested update method cannot be applied to the given model pair.
    #[error("configuration error: {0}")]
    Config(String),

    /// A config file line could not be parsed.
    #[error("config error at line {line}: {msg}")]
    ConfigParse { line: usize, msg: String },

    /// A CSV file had a malformed line or field.
    #[error("csv error in {path} at line {line}: {msg}")]
    Csv {
        path: String,
        line: usize,
        msg: String,
    },

    /// A model bundle file was missing.
    #[error("missing model file: {0}")]
    MissingModel(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
