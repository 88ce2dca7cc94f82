use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("input contains no edges")]
    Empty,

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("edge ({src}, {dst}) is not in the graph")]
    MissingEdge { src: u32, dst: u32 },

    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),

    #[error("exact enumeration refused: {edges} probabilistic edges exceeds the limit of {limit}")]
    Capacity { edges: usize, limit: usize },

    #[error("malformed serialized data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
