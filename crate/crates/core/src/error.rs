use thiserror::Error;

use crate::detect::DetectorId;

#[derive(Debug, Error)]
pub enum Error {
    /// The channel matrix is singular (or its first column vanishes) so the
    /// requested factorization or inversion is undefined.
    #[error("degenerate channel: {0}")]
    DegenerateChannel(&'static str),

    #[error("invalid PNC coefficient k = {0}")]
    InvalidCoefficient(i64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("detector {0} never reaches the target BER on the grid")]
    NoCrossing(DetectorId),

    #[error("usage: {0}")]
    Usage(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
