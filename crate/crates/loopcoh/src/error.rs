//! Crate-wide error type.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed element text or presentation data.
    Parse(String),
    /// A parameter is outside the range the computation supports.
    Unsupported(String),
    /// An element of the x-ring does not lie in the subalgebra generated by
    /// the Stiefel-Whitney images, so it has no w-expression.
    NotInWImage { degree: usize },
    /// Construction data violates a structural requirement.
    Invalid(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
            Error::NotInWImage { degree } => write!(
                f,
                "element of degree {degree} is not in the image of the w-subalgebra"
            ),
            Error::Invalid(msg) => write!(f, "invalid construction: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
