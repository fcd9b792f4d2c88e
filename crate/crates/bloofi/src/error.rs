use std::fmt;
use std::io;

/// Errors reported by parameter derivation, the index structures, and
/// collection serialization.
#[derive(Debug)]
pub enum Error {
    /// A parameter is outside its documented domain.
    InvalidParameter(String),
    /// The filter identifier is already present in the index.
    DuplicateId(u64),
    /// The filter identifier is not present in the index.
    UnknownId(u64),
    /// An in-place update tried to clear bits of the stored filter.
    /// Updates are OR-only; shrinking a filter requires delete + insert
    /// or a full rebuild.
    NonMonotonicUpdate(u64),
    /// The filter was built with a different hash family (or length) than
    /// the index it was handed to.
    FamilyMismatch,
    /// The file does not look like a filter collection (bad magic or
    /// unsupported version).
    Format(String),
    /// The file is structurally a collection but its payload is damaged
    /// (truncated, or nonzero padding bits).
    Corrupt(String),
    /// Underlying I/O failure.
    Io(io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::DuplicateId(id) => write!(f, "filter id {id} is already indexed"),
            Error::UnknownId(id) => write!(f, "filter id {id} is not indexed"),
            Error::NonMonotonicUpdate(id) => {
                write!(f, "update of filter id {id} clears bits; updates are OR-only")
            }
            Error::FamilyMismatch => write!(f, "filter does not use the index's hash family"),
            Error::Format(msg) => write!(f, "unrecognized collection format: {msg}"),
            Error::Corrupt(msg) => write!(f, "corrupt collection: {msg}"),
            Error::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<io::Error> for Error {
    fn from(e: io::Error) -> Self {
        Error::Io(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
