use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid graph size: {0}")]
    InvalidSize(String),
    #[error("invalid edge probability {0}; expected 0 < p <= 1")]
    InvalidProbability(f64),
    #[error("no connected G(n={n}, p={p}) sample within {attempts} attempts; p is probably too small")]
    ErdosRenyiDisconnected { n: usize, p: f64, attempts: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("path is not a walk in the graph: {0} and {1} are not adjacent")]
    NotAPath(usize, usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("linear system is singular (pivot {pivot:e} below tolerance)")]
    Singular { pivot: f64 },
    #[error("biased kernel diagonal is negative at node {node}: {value}")]
    NegativeDiagonal { node: usize, value: f64 },
    #[error("non-positive resistance {value} on edge ({u}, {v})")]
    NonPositiveResistance { u: usize, v: usize, value: f64 },
    #[error("coupled chain is infeasible: adjacent pair ({x}, {y}) has stay probability {stay}")]
    CoupledChainInfeasible { x: usize, y: usize, stay: f64 },
    #[error("state space too large for an exact solve: n = {n} exceeds {limit}; use the Monte Carlo estimator")]
    StateSpaceTooLarge { n: usize, limit: usize },
    #[error("no hidden vertex within tolerance (kernel is probably not reversible)")]
    NoHiddenVertex,
    #[error("bound violated: {0}")]
    BoundViolated(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
