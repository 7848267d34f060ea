use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph spec: {field}: {reason}")]
    InvalidSpec { field: &'static str, reason: String },

    #[error("block size {bs} does not divide matrix order {n}")]
    BlockSize { n: usize, bs: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("truncated input: expected {expected} bytes of data, found {found}")]
    TruncatedInput { expected: u64, found: u64 },

    #[error("dimension mismatch: expected n={expected}, found n={found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("element kind mismatch: expected {expected}, file holds {found}")]
    ElemKindMismatch { expected: &'static str, found: &'static str },

    #[error("path matrix is inconsistent while expanding ({i}, {j})")]
    CorruptPathMatrix { i: usize, j: usize },

    #[error("path hop {from} -> {to} is not an edge")]
    InvalidPath { from: usize, to: usize },

    #[error("vertex {vertex} out of range for n={n}")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("could not start worker thread: {0}")]
    ThreadPool(#[source] io::Error),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("{config}: {source}")]
    Bench {
        config: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}
