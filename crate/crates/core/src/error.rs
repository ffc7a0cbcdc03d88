use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CimError {
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid Ising problem: {0}")]
    InvalidProblem(String),

    #[error("spin values must be +1 or -1, found {0}")]
    InvalidSpin(i8),

    #[error("matrix is not symmetric (max |a_ij - a_ji| = {0:e})")]
    NotSymmetric(f64),

    #[error("problem of size {size} exceeds the limit of {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("coupling scale must be nonzero")]
    ZeroScale,

    #[error("ambiguous spin readout: |c_{index}| = {value:e} is below the readout floor")]
    AmbiguousReadout { index: usize, value: f64 },

    #[error("block stability analysis requires vanishing quadratures (max |s_j| = {0:e})")]
    NonzeroQuadrature(f64),

    #[error("time step {dt:e} exceeds the limit {limit:e}")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cubic graphs require an even order in [{min}, {max}], got {order}")]
    OrderOutOfRange { order: usize, min: usize, max: usize },

    #[error("graph6: {0}")]
    Graph6(#[from] Graph6Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Graph6Error {
    #[error("empty input")]
    Empty,
    #[error("malformed header")]
    MalformedHeader,
    #[error("byte {0:#04x} outside the printable graph6 range")]
    InvalidByte(u8),
    #[error("body has {got} bytes, expected {expected}")]
    BodyLength { expected: usize, got: usize },
    #[error("padding bits are not zero")]
    NonzeroPadding,
    #[error("order {0} cannot be encoded")]
    OrderTooLarge(usize),
}

pub type Result<T> = std::result::Result<T, CimError>;
