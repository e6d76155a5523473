use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid index: {0}")]
    Index(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("insufficient grid: band-limit {available} is below the required {required}")]
    InsufficientGrid { required: usize, available: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("singular Gram matrix in rotation expansion (grid defect)")]
    SingularGram,

    #[error("no crossing: angular-mean occupation never drops through {threshold}")]
    NoCrossing { threshold: f64 },

    #[error("size guard exceeded: Hilbert-space dimension {dim} > {limit}")]
    SizeGuard { dim: usize, limit: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
