use std::io;

use thiserror::Error;

/// Broad class of a failure, used by front-ends to pick exit codes.
#[derive(Clone, Copy, Debug, Eq, PartialEq)]
pub enum ErrorKind {
    /// Invalid configuration or arguments.
    Config,
    /// Missing, malformed or inconsistent input data.
    Input,
    /// A structure violated one of its invariants.
    Invariant,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("XML error at line {line}, column {column}: {message}")]
    Xml {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("cannot align aspect in sentence {sentence_id}: {message}")]
    Alignment {
        sentence_id: String,
        message: String,
    },

    #[error("format error in {context}: {message}")]
    Format { context: String, message: String },

    #[error("sentence of {len} tokens exceeds the encoder capacity of {max} positions")]
    Capacity { len: usize, max: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("layer {layer} out of range, provider has layers 0..={depth}")]
    LayerOutOfRange { layer: usize, depth: usize },

    #[error("provider failed while masking {masked:?} in {context}: {source}")]
    Provider {
        context: String,
        masked: Vec<usize>,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid subword alignment: {0}")]
    SubwordAlignment(String),

    #[error("matrix file line {line}: {message}")]
    MatrixFile { line: usize, message: String },

    #[error("invalid impact matrix {id}: {message}")]
    InvalidMatrix { id: String, message: String },

    #[error("invalid tree for sentence {sentence}: {reason}")]
    InvalidTree { sentence: String, reason: String },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("{0}")]
    EmptyInput(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) | Error::LayerOutOfRange { .. } => ErrorKind::Config,
            Error::InvalidMatrix { .. } | Error::InvalidTree { .. } => ErrorKind::Invariant,
            Error::Provider { source, .. } => source.kind(),
            _ => ErrorKind::Input,
        }
    }

    pub(crate) fn format(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            context: context.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
