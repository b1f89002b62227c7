use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be 1, 2 or 3 (got {0})")]
    InvalidDimension(usize),

    #[error("the long stencil needs at least 5 cells per axis (got {0})")]
    TooFewCells(usize),

    #[error("axis {axis} out of range for a {dim}-dimensional grid")]
    InvalidAxis { axis: usize, dim: usize },

    #[error("ghost cells must be filled before applying {0}")]
    GhostsNotFilled(&'static str),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite value {value} produced at cell {cell:?}")]
    NonFinite { cell: [usize; 3], value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("cosine basis validation failed for mode {mode}: deviation {deviation:e}")]
    PlanValidation { mode: usize, deviation: f64 },

    #[error("dense reference solver limited to {cap} cells (grid has {cells})")]
    TooLargeForDense { cells: usize, cap: usize },

    #[error("dense factorization failed (singular operator)")]
    Singular,

    #[error("field mean {mean:e} is not zero (norm {norm:e})")]
    NonzeroMean { mean: f64, norm: f64 },

    #[error("|m~| = {magnitude:e} below floor {floor} at cell {cell:?}")]
    Projection { cell: [usize; 3], magnitude: f64, floor: f64 },

    #[error("solver backward error {residual:e} exceeds {tolerance:e}")]
    SolverResidual { residual: f64, tolerance: f64 },

    #[error("time history holds {have} levels, {need} required")]
    ShortHistory { have: usize, need: usize },

    #[error("step {step} (t = {t}) failed: {source}")]
    Step {
        step: usize,
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("order fit needs at least two points with positive error")]
    DegenerateFit,

    #[error("telescope coefficient fit did not converge (residual {0:e})")]
    TelescopeFit(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
