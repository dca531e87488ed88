use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Variant names follow the failure modes of the individual operations;
/// each carries a human-readable context string.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("degenerate edge: {0}")]
    DegenerateEdge(String),
    #[error("polygon is not convex: {0}")]
    NotConvex(String),
    #[error("invalid split index {m} for {n} angles")]
    InvalidSplit { m: usize, n: usize },
    #[error("non-finite curve evaluation: {0}")]
    NonFinite(String),
    #[error("curve self-intersects between segments {0} and {1}")]
    SelfIntersection(usize, usize),
    #[error("curve leaves its chart: {0}")]
    ChartViolation(String),
    #[error("smoothing radius too large: {0}")]
    EpsilonTooLarge(String),
    #[error("adaptive quadrature did not converge (estimated error {0:e})")]
    QuadratureFailure(f64),
    #[error("lemma premise violated: {0}")]
    PremiseViolated(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("negative eigenvalue {0}")]
    NegativeEigenvalue(f64),
    #[error("mesh quality failure: {0}")]
    MeshQualityFailure(String),
    #[error("bad region specification: {0}")]
    BadRegionSpec(String),
    #[error("degenerate triangle {0}")]
    DegenerateTriangle(usize),
    #[error("eigen solver stagnated after {iterations} iterations (residual {residual:e})")]
    SolverStagnation { iterations: usize, residual: f64 },
    #[error("no Dirichlet vertices; the first eigenvalue of a pure Neumann problem is zero")]
    NoDirichlet,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
