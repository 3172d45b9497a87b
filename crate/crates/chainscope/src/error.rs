use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("expression parse error: {0}")]
    Parse(String),

    #[error("non-finite field value at {at:?}")]
    NonFiniteField { at: Vec<f64> },

    #[error("edge count {got} exceeds configured cap {cap}")]
    EdgeOverflow { got: u64, cap: u64 },

    #[error("walk is not closed (edge {index} ends at node {got}, next starts at {expected})")]
    WalkNotClosed {
        index: usize,
        got: u64,
        expected: u64,
    },

    #[error("empty walk")]
    EmptyWalk,

    #[error("graph contains no cycle")]
    Acyclic,

    #[error("class is not quasi-Lyapunov; violating cycle has {cycle_len} edges")]
    NotQuasiLyapunov { cycle_len: usize },

    #[error("infeasible prescription: {reason}; witness path of {witness_len} edges")]
    InfeasiblePrescription { reason: String, witness_len: usize },

    #[error("unknown chain id {0}")]
    UnknownChain(usize),

    #[error("rational approximation failed: {0}")]
    ApproxFailed(String),

    #[error("numeric overflow in exact arithmetic: {0}")]
    NumericOverflow(String),

    #[error("linear program infeasible")]
    LpInfeasible,

    #[error("graph file format error: {0}")]
    Format(String),

    #[error("graph file version {0} not supported")]
    Version(u16),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
