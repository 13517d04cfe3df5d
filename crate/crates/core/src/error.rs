use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate region: dimension {dim} has bounds [{lower}, {upper}]")]
    DegenerateRegion { dim: usize, lower: f64, upper: f64 },

    #[error("region must have at least one dimension")]
    EmptyRegion,

    #[error("dimension index {index} out of range for a {dim}-dimensional region")]
    DimensionOutOfRange { index: usize, dim: usize },

    #[error("point has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point coordinate {dim} = {value} lies outside [{lower}, {upper}]")]
    OutsideDomain {
        dim: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("{benchmark} is undefined for dimension {dim}")]
    InvalidDimension { benchmark: &'static str, dim: usize },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
