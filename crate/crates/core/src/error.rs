use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("F_j is only defined for t > 0 (got t = {0})")]
    OutsideDomain(f64),

    #[error("F_0(t) = -t has no positive root for y = {0}")]
    NoPositiveRoot(f64),

    #[error("bracket expansion did not converge after {iterations} steps")]
    BracketExpansion { iterations: usize },

    #[error("target {target} unattainable: search stopped at {reached} after {expansions} expansions")]
    TargetUnattainable {
        target: f64,
        reached: f64,
        expansions: usize,
    },

    #[error("root iteration did not converge in {iterations} iterations (bracket [{lo}, {hi}])")]
    NoConvergence { iterations: usize, lo: f64, hi: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite sample at node {index}")]
    NonFinite { index: usize },

    #[error("index {index} is not an interior node of a grid with {len} nodes")]
    BoundaryIndex { index: usize, len: usize },

    #[error("singular Jacobian at node {node}")]
    SingularJacobian { node: usize },

    #[error("Newton iteration diverged after {iterations} steps (residual {residual:e})")]
    Divergence { iterations: usize, residual: f64 },

    #[error("positivity breakdown: step halving exhausted at iteration {iteration}")]
    PositivityBreakdown { iteration: usize },

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
}
