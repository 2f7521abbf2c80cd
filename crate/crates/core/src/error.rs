use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported shape Gr({k},{big_n}): {reason}")]
    UnsupportedShape {
        k: usize,
        big_n: usize,
        reason: &'static str,
    },
    #[error("shape mismatch: operands built for n = {left} and n = {right}")]
    ShapeMismatch { left: usize, right: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("point pair lies on the diagonal (|eta|^2 = {norm_sq:e})")]
    DiagonalSingularity { norm_sq: f64 },
    #[error("jet derivative order exhausted; start from higher-order jets")]
    JetOrderExhausted,
    #[error("arithmetic domain error: {0}")]
    ArithmeticDomain(&'static str),
    #[error("singular matrix (pivot magnitude {pivot:e})")]
    SingularMatrix { pivot: f64 },
    #[error("transformed point leaves the chart (|det(A + Bz)| = {det_abs:e})")]
    ChartExit { det_abs: f64 },
    #[error("invalid section spec: {0}")]
    InvalidSection(String),
    #[error("quadrature did not converge: error estimate {estimate:e} above tolerance {tolerance:e}")]
    NonConvergence { estimate: f64, tolerance: f64 },
    #[error("unsupported quadrature request: {0}")]
    UnsupportedQuadrature(String),
    #[error("unknown check name `{0}`")]
    UnknownCheck(String),
    #[error("parse error: {0}")]
    Parse(String),
}
