use thiserror::Error;

/// Errors raised anywhere in the compiler pipeline.
///
/// The variants map one-to-one onto the command-line exit-code classes, so
/// callers can route a failure without inspecting its message.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed input text. `location` is a line reference for DIMACS
    /// input or a JSON pointer for JSON input.
    #[error("format error at {location}: {message}")]
    Format { location: String, message: String },

    /// The instance exceeds a brute-force or simulation cap.
    #[error("instance too large: {0}")]
    SizeCap(String),

    /// A caller-supplied value does not satisfy an operation precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An internal consistency check failed. This always signals a bug.
    #[error("internal invariant breached: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn format(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            location: location.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
