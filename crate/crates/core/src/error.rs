use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("point cloud must contain at least one point")]
    EmptyCloud,
    #[error("ambient dimension must be positive")]
    ZeroDimension,
    #[error("coordinate count {len} is not a multiple of dimension {dim}")]
    RaggedCoordinates { len: usize, dim: usize },
    #[error("row {row}: expected {expected} values, found {found}")]
    RaggedRow { row: usize, expected: usize, found: usize },
    #[error("row {row}, column {column}: non-finite value")]
    NonFinite { row: usize, column: usize },
    #[error("point index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("k = {k} must be at least 1 and below the cloud size {len}")]
    InvalidK { k: usize, len: usize },
    #[error("invalid radii: inner {inner}, outer {outer}")]
    InvalidRadii { inner: f64, outer: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("point {point}: all neighbours lie at distance 0, radius range undefined")]
    DegenerateNeighbourhood { point: usize },
    #[error("Vietoris-Rips complex exceeds the simplex limit of {limit}")]
    SimplexLimit { limit: usize },
    #[error("simplex keys overflow for {vertices} vertices at dimension {dim}")]
    KeyOverflow { vertices: usize, dim: usize },
    #[error("invalid filtration: {0}")]
    InvalidFiltration(String),
    #[error("homology degree {degree} not computed (available: 0..{available})")]
    DegreeOutOfRange { degree: usize, available: usize },
    #[error("persistence diagrams have different degrees ({left} vs {right})")]
    DegreeMismatch { left: usize, right: usize },
    #[error("exhaustive matching limited to {limit} points, got {found}")]
    OracleTooLarge { limit: usize, found: usize },
    #[error("cannot shrink a sample: {0}")]
    InvalidExtension(String),
    #[error("point {point}: every annulus in the grid is empty")]
    EmptyGrid { point: usize },
}
