use thiserror::Error;

use crate::graph::Vertex;

/// Errors raised for malformed inputs. Algorithmic failures (a stage that
/// could not find its structure) are reported as values, not through this type.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("edge {{{0}, {1}}} is not present in the host graph")]
    MissingEdge(Vertex, Vertex),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("composition failed: {0}")]
    Composition(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
