use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("identity dilation has a single trivial coset")]
    TrivialDilation,

    #[error("dilation factors must be >= 2 (got alpha = {alpha}, beta = {beta})")]
    InvalidDilation { alpha: u32, beta: u32 },

    #[error("more filters than cosets ({filters} filters, {cosets} cosets)")]
    TooManyFilters { filters: usize, cosets: usize },

    #[error("empty filter list")]
    NoFilters,

    #[error("input rows are not orthonormal (deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("matrix is not a partial isometry with full range at {node} (deviation {deviation:.3e})")]
    NotPartialIsometry { node: String, deviation: f64 },

    #[error("rank-deficient rows at {node}")]
    RankDeficient { node: String },

    #[error("pointwise completion failed at {} node(s): {}", .nodes.len(), .nodes.join("; "))]
    CompletionFailed { nodes: Vec<String> },

    #[error("filter is not univariate in the required variable")]
    NotUnivariate,

    #[error("zero polynomial has no support")]
    ZeroPolynomial,

    #[error("shape {rows}x{cols} is not divisible by {row_factor}x{col_factor} (need rows divisible by {row_factor} and columns by {col_factor})")]
    Indivisible {
        rows: usize,
        cols: usize,
        row_factor: usize,
        col_factor: usize,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid Meyer corner specification: {0}")]
    InvalidCornerSpec(String),

    #[error("grid size {0} is not a positive multiple of 4")]
    InvalidGrid(usize),

    #[error("filter quotient divides by a vanishing profile value at {node}")]
    SingularQuotient { node: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
