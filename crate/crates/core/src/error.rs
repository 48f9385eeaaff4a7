use thiserror::Error;

/// Errors raised by instance handling, graph primitives and the solver.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("vertex id {id} out of range (n = {n})")]
    VertexOutOfRange { id: usize, n: usize },

    #[error("need n >= 2k, got n = {n}, k = {k}")]
    TooFewVertices { n: usize, k: usize },

    #[error("k must be >= 1")]
    ZeroSalesmen,

    #[error("frac_free must lie in [0, 1], got {0}")]
    BadFracFree(f64),

    #[error("empty vertex set")]
    EmptyVertexSet,

    #[error("drop pair ({0}, {1}) is not an edge of the tree")]
    DropPairNotInTree(usize, usize),

    #[error("degree parity does not admit an Euler {kind} (odd-degree vertices: {odd:?})")]
    EulerParity { kind: &'static str, odd: Vec<usize> },

    #[error("multigraph is disconnected over its non-isolated vertices")]
    Disconnected,

    #[error("malformed labeled path: {0}")]
    MalformedPath(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("oracle budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("solver invariant violated: {0}")]
    BoundViolation(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
