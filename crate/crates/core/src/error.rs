use thiserror::Error;

use crate::codec::TokenKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("value {value} outside {range}")]
    Range { value: f64, range: &'static str },

    #[error("capacity exceeded: {what} ({got} > {limit})")]
    Capacity { what: &'static str, got: usize, limit: usize },

    #[error("duplicate vertex position: vertices {0} and {1}")]
    DuplicateVertex(usize, usize),

    #[error(transparent)]
    Grammar(#[from] GrammarError),

    #[error("token {token} is not a code of quantizer level {level}")]
    Vocab { token: u32, level: usize },

    #[error("descriptor length {got}, expected {expected}")]
    DescriptorLength { got: usize, expected: usize },

    #[error("codebook training needs at least {needed} descriptors, got {got}; use a smaller K")]
    CorpusTooSmall { needed: usize, got: usize },

    #[error("model is not well formed: {0}")]
    Topology(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("half-edge {halfedge}: {source}")]
    Sampling { halfedge: usize, source: Box<Error> },

    #[error("format error: {0}")]
    Format(String),

    #[error("line {line}{}: {message}", position.map(|p| format!(", token {p}")).unwrap_or_default())]
    Located { line: usize, position: Option<usize>, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

/// A token rejected by the sequence grammar.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("token {found} at position {position} rejected: {reason} (expected {expected})")]
pub struct GrammarError {
    pub position: usize,
    pub found: u32,
    pub found_kind: Option<TokenKind>,
    pub expected: String,
    pub reason: GrammarViolation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrammarViolation {
    /// Token id outside every vocabulary range.
    UnknownToken,
    /// Pointer to a vertex that has not been emitted yet.
    ForwardReference,
    /// Pointer smaller than one already emitted for this vertex.
    UnsortedPointer,
    /// Stream ended inside a vertex or edge group.
    IncompleteVertex,
    /// `<sep>` or `<end>` inside a group.
    DelimiterPosition,
    /// Component already holds the maximum vertex count.
    ComponentFull,
    /// Any other token kind mismatch.
    UnexpectedKind,
    /// Tokens after `<end>` or a missing `<start>`.
    Framing,
}

impl std::fmt::Display for GrammarViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            GrammarViolation::UnknownToken => "unknown token id",
            GrammarViolation::ForwardReference => "forward reference",
            GrammarViolation::UnsortedPointer => "pointers must be non-decreasing",
            GrammarViolation::IncompleteVertex => "incomplete vertex",
            GrammarViolation::DelimiterPosition => "delimiter inside a group",
            GrammarViolation::ComponentFull => "component vertex capacity reached",
            GrammarViolation::UnexpectedKind => "unexpected token kind",
            GrammarViolation::Framing => "sequence framing",
        };
        f.write_str(s)
    }
}
