//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by geometry, convolution, training, and harness code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty point cloud")]
    EmptyCloud,

    #[error("k exceeds cloud size (k = {k}, n = {n})")]
    KExceedsCloud { k: usize, n: usize },

    #[error("epsilon must be positive (got {0})")]
    NonPositiveEpsilon(f64),

    #[error("sample count exceeds cloud size (m = {m}, n = {n})")]
    SampleCountExceedsCloud { m: usize, n: usize },

    #[error("PC-2D subsampling requires even raster sides (got {width}x{height})")]
    OddRaster { width: usize, height: usize },

    #[error("degenerate normal cell")]
    DegenerateNormalCell,

    #[error("degenerate neighborhood covariance")]
    DegenerateCovariance,

    #[error("zero bandwidth: all neighbors coincide")]
    ZeroBandwidth,

    #[error("zero offset in VI descriptor")]
    ZeroOffset,

    #[error("zero direction vector")]
    ZeroDirection,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("misaligned neighborhood arrays: {0}")]
    MisalignedArrays(String),

    #[error("Sobolev penalty requires polynomial weight function")]
    SobolevOnMlp,

    #[error("invalid network configuration: {0}")]
    InvalidNetworkConfig(String),

    #[error("training diverged: loss is not finite")]
    Diverged,

    #[error("invalid IDX file: {0}")]
    InvalidIdx(String),

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
