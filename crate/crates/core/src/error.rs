use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),
    #[error("kernel singularity at the origin")]
    Singularity,
    #[error("finite-difference stencil leaves the domain at {point:?}")]
    StencilOutOfDomain { point: Vec<f64> },
    #[error("point {point:?} lies outside the domain")]
    OutOfDomain { point: Vec<f64> },
    #[error("point {point:?} lies on the boundary; principal values are not supported")]
    OnBoundary { point: Vec<f64> },
    #[error("trace offset {offset} moves panel {panel} outside the domain")]
    InvalidOffset { offset: f64, panel: usize },
    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),
    #[error("field `{0}` cannot be evaluated away from its sample nodes")]
    NotEvaluable(String),
    #[error("test family is empty")]
    EmptyFamily,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn point_f64<T: crate::Real>(x: &[T]) -> Vec<f64> {
    x.iter().map(|v| v.to_f64_lossy()).collect()
}
