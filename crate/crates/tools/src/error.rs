use std::io;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Core(#[from] gsr_core::Error),
    #[error("bad header: {0}")]
    BadHeader(String),
    #[error("file truncated: expected {expected} entries, read {found}")]
    Truncated { expected: usize, found: usize },
    #[error("line {line}: expected {expected} components, found {found}")]
    RaggedLine { line: usize, expected: usize, found: usize },
    #[error("line {line}: {message}")]
    BadLine { line: usize, message: String },
    #[error("line {0}: not valid UTF-8")]
    NotUtf8(usize),
    #[error("block {block}: {message}")]
    BadBlock { block: usize, message: String },
    #[error("duplicate document id {0:?}")]
    DuplicateDocument(String),
    #[error("cannot write token {0:?} in this format")]
    UnwritableToken(String),
    #[error("refusing to write an empty embedding store")]
    EmptyStore,
}

pub type Result<T, E = FormatError> = std::result::Result<T, E>;

/// A record that was clamped, skipped or flagged while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Warning {
    /// `line 12`, `block 3`, ...
    pub locator: String,
    pub message: String,
}

/// Every parser that tolerates a malformed record appends it here.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Warnings(pub Vec<Warning>);

impl Warnings {
    pub fn push(&mut self, locator: impl Into<String>, message: impl Into<String>) {
        self.0.push(Warning {
            locator: locator.into(),
            message: message.into(),
        });
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Warning> {
        self.0.iter()
    }
}
