use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A coordinate or code does not fit the requested refinement level.
    #[error("out of range: {0}")]
    Range(String),
    /// An operation was applied to an element it is not defined for (e.g. the parent of the root).
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid grid shape: {0}")]
    InvalidShape(String),
    /// Data does not line up with a shape or a mesh.
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("logic error: {0}")]
    Logic(String),
    /// Input values the error algebra cannot handle.
    #[error("data error: {0}")]
    Data(String),
    #[error("configuration error: {0}")]
    Config(String),
    /// A refinement bit-field that does not describe a valid mesh.
    #[error("corrupt refinement stream: {0}")]
    CorruptStream(String),
    #[error("corrupt artifact at offset {offset} ({section}): {message}")]
    CorruptArtifact {
        offset: usize,
        section: &'static str,
        message: String,
    },
    #[error("unsupported feature: {0}")]
    Unsupported(String),
    #[error("encode error: {0}")]
    Encode(String),
}
