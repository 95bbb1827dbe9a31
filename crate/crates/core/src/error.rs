use thiserror::Error;

use crate::symscalar::ScalarError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("expressions live on different charts")]
    ChartMismatch,
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("odd generator `{0}` cannot be bound to a scalar")]
    OddBinding(String),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("metric is not graded symmetric: {0}")]
    NotSymmetric(String),
    #[error("metric is not invertible in this mode: {0}")]
    NotInvertible(String),
    #[error("singular linear system: {0}")]
    Singular(String),
    #[error("parity mismatch: {0}")]
    Parity(String),
    #[error("jet order too high: {0}")]
    JetOrder(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
