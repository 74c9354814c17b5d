//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("variable-family mismatch: left dims {0:?} vs {1:?}")]
    DimensionMismatch((usize, usize), (usize, usize)),
    #[error("unknown variable id {0}")]
    UnknownVariable(String),
    #[error("missing assignment for variable {0}")]
    MissingAssignment(String),
    #[error("illegal amplitude support for base {base}: {reason}")]
    IllegalSupport { base: String, reason: String },
    #[error("kernel bases do not compose: {0} after {1}")]
    NonComposable(String, String),
    #[error("jet index shapes do not compose: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("base {0} has no adjoint partner")]
    UnsupportedAdjoint(String),
    #[error("invalid kernel parameters: {0}")]
    InvalidKernel(String),
    #[error("quadrature order too low: doubling changed result by {0:.3e}")]
    QuadratureUnstable(f64),
    #[error("Gram quadrature validation failed: discrepancy {0:.3e}")]
    GramValidation(f64),
    #[error("jet restriction precondition violated: lower-order jet of size {0:.3e}")]
    NotInIdealPower(f64),
    #[error("extension not guaranteed: jet map rank {rank} < jet dimension {dim} at p = {p}")]
    RankDeficient { rank: usize, dim: usize, p: u32 },
    #[error("degenerate fit input: {0}")]
    DegenerateFit(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
