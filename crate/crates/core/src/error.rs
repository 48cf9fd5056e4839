use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("edge count {requested} exceeds the {max} possible edges of a simple graph on {nodes} nodes")]
    TooManyEdges {
        nodes: usize,
        requested: usize,
        max: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("path budget iteration did not converge within {0} iterations")]
    NonConvergence(usize),

    #[error("edge goal {goal} is not attainable for exponents in [{lo}, {hi}]")]
    UnattainableEdgeGoal { goal: f64, lo: f64, hi: f64 },

    #[error("bitstring length mismatch: {left} vs {right} bits")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty share set")]
    EmptyShareSet,

    #[error("malformed edge list at line {line}: {reason}")]
    MalformedEdgeList { line: usize, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
