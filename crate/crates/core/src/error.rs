use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("chart index {index} out of range for n = {n}")]
    ChartIndex { index: usize, n: usize },
    #[error("lattice vector {k:?} has weighted degree {got}, expected {expected}")]
    DegreeMismatch { k: Vec<i64>, got: i64, expected: i64 },
    #[error("point lies outside the closed polytope")]
    OutsidePolytope,
    #[error("point is not in the interior of the polytope")]
    NotInterior,
    #[error("morphisms are not composable: {0}")]
    NotComposable(String),
    #[error("Newton iteration did not converge after {0} iterations")]
    NonConvergence(usize),
    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
