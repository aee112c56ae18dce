use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension must be at least 2, got {0}")]
    BadDimension(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("height must be positive and finite, got {0}")]
    NonPositiveHeight(f64),
    #[error("coordinate is not finite")]
    NonFinite,
    #[error("cells are at different levels ({0} vs {1})")]
    LevelMismatch(i32, i32),
    #[error("cells must be distinct and not ancestor/descendant of each other")]
    AncestorPair,
    #[error("empty input")]
    Empty,
    #[error("cell at level {0} lies outside the root shadow")]
    OutsideRoot(i32),
    #[error("point center outside [1/4,1/2]^(D-1)")]
    OutsideMargin,
    #[error("k must be at least 1")]
    BadK,
    #[error("parent map contains a cycle through vertex {0}")]
    Cycle(usize),
    #[error("vertex {0} out of range")]
    BadVertex(usize),
    #[error("cell outside the search window")]
    OutsideWindow,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
