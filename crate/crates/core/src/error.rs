use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: n = {n}, d = {d}")]
    InvalidDimensions { n: u64, d: u64 },

    #[error("rank {rank} out of range 1..={max}")]
    RankOutOfRange { rank: String, max: String },

    #[error("beta = {beta} outside the valid range [{min}, {max}]")]
    BetaOutOfRange { beta: u32, min: u32, max: u32 },

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: u64, max: u64 },

    #[error("degenerate denominator: C(n,d) = {total} <= 2^(d+2)*N = {threshold}")]
    DegenerateDenominator { total: String, threshold: String },

    #[error("invalid phi {0}")]
    InvalidPhi(f64),

    #[error("unsupported parameters (n = {n}, d = {d}, N = {workers}): {reason}")]
    UnsupportedParameters {
        n: u32,
        d: u32,
        workers: u64,
        reason: String,
    },

    #[error("dimension mismatch: expected (n = {expected_n}, d = {expected_d}), got (n = {n}, d = {d})")]
    DimensionMismatch {
        expected_n: u32,
        expected_d: u32,
        n: u32,
        d: u32,
    },

    #[error("instance too large: {0}")]
    InstanceTooLarge(String),

    #[error("C(n,d) = {total} exceeds the materialization cap of {cap} tuples")]
    MaterializationCap { total: String, cap: u64 },

    #[error("count overflowed 128-bit arithmetic")]
    CountOverflow,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate edge {edge} at line {line}")]
    DuplicateEdge { line: usize, edge: String },

    #[error("index {value} out of bounds [1, {n}] at line {line}")]
    IndexOutOfBounds { line: usize, value: u64, n: u32 },

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
