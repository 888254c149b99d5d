use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("corrupt node reference: {0}")]
    UnknownNode(String),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("graph has no segments")]
    EmptyGraph,
    #[error("expected exactly 2 root trees, got {0}")]
    RootCount(usize),
    #[error("edit rejected: {0}")]
    Edit(String),
    #[error("edit script line {line}: {message}")]
    Script { line: usize, message: String },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("tree too small for {0} injection")]
    TreeTooSmall(&'static str),
    #[error("regression needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("covariate is constant")]
    ConstantCovariate,
    #[error("missing covariate for subjects: {}", .0.join(", "))]
    MissingCovariates(Vec<String>),
    #[error("thickness must be finite and non-negative, got {0}")]
    InvalidThickness(f64),
}

/// Distinct classes of text-format parse failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    DanglingReference(String),
    Cycle(String),
    TooFewPoints(String),
    NonPositiveRadius(String),
    DuplicateId(String),
    TooManyChildren(String),
    NegativeThickness(String),
    MultipleParents(String),
    MissingRoot,
    Unreachable(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax(m) => write!(f, "syntax error: {m}"),
            ParseErrorKind::DanglingReference(id) => write!(f, "reference to undeclared id `{id}`"),
            ParseErrorKind::Cycle(id) => write!(f, "connectivity cycle through segment `{id}`"),
            ParseErrorKind::TooFewPoints(id) => write!(f, "segment `{id}` has fewer than 2 points"),
            ParseErrorKind::NonPositiveRadius(id) => write!(f, "point `{id}` has non-positive radius"),
            ParseErrorKind::DuplicateId(id) => write!(f, "duplicate id `{id}`"),
            ParseErrorKind::TooManyChildren(id) => write!(f, "node `{id}` has more than 2 children"),
            ParseErrorKind::NegativeThickness(id) => write!(f, "node `{id}` has negative thickness"),
            ParseErrorKind::MultipleParents(id) => write!(f, "segment `{id}` has more than one parent"),
            ParseErrorKind::MissingRoot => write!(f, "no ROOT record"),
            ParseErrorKind::Unreachable(id) => write!(f, "segment `{id}` is not reachable from a root"),
        }
    }
}

/// A parse failure with a 1-based source position (column 0 when the error
/// is not tied to a single token).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub fn new(line: usize, column: usize, kind: ParseErrorKind) -> Self {
        Self { line, column, kind }
    }
}
