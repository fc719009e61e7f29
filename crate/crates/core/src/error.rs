use thiserror::Error;

/// Errors surfaced by the library.
///
/// Numerical failures (a saddle point, a collapsing minimum, degenerate
/// branches) are reported rather than silently absorbed: downstream layers
/// decide whether to abort or to record the failure and continue.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid system specification: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("gamma_inf = {gamma} outside the positivity window ({lo}, 1) for N = {n}")]
    OutsidePositivityWindow { gamma: f64, lo: f64, n: usize },

    #[error("solver did not converge after {iters} iterations (residual {residual:.3e})")]
    SolverDiverged { iters: usize, residual: f64 },

    #[error("stationary point is a saddle: smallest Hessian root {min_root:.3e}")]
    SaddlePoint { min_root: f64 },

    #[error("family is not smooth enough: step-halving pair disagrees by {rel:.3e} (limit {limit:.1e})")]
    NonSmooth { rel: f64, limit: f64 },

    #[error("unstable mode: squared frequency {lambda:.6e} < 0")]
    UnstableMode { lambda: f64 },

    #[error("degenerate branches: |lambda_plus - lambda_minus| = {gap:.3e}, mixing angles undefined")]
    DegenerateBranches { gap: f64 },

    #[error("cluster pattern mismatch: expected multiplicities {expected:?}, found {found:?}")]
    ClusterPattern {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{0} not applicable for N = {1}")]
    NotApplicable(&'static str, usize),

    #[error("non-integral multiplicity for {species}: {numerator} not divisible by {order}")]
    NonIntegralMultiplicity {
        species: &'static str,
        numerator: i128,
        order: u128,
    },

    #[error("quanta refer to nonexistent cluster {0}")]
    NoSuchCluster(usize),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
