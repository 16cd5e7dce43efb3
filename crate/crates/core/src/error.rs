use thiserror::Error;

/// Errors raised while building meshes, fields and studies.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FvError {
    #[error("invalid mesh construction: {0}")]
    Construction(String),
    #[error("cell {cell} is not a convex quadrangle")]
    NonConvexCell { cell: usize },
    #[error("cell {cell} has {faces} faces, expected a quadrangle")]
    NotQuadrangle { cell: usize, faces: usize },
    #[error("mesh is not made of axis-aligned rectangles (cell {cell})")]
    NotRectangular { cell: usize },
    #[error("face {face} is not shared as a whole face: {reason}")]
    FaceMatching { face: usize, reason: String },
    #[error("invalid time grid: {0}")]
    TimeGrid(String),
    #[error("test function support violates the compact-support requirement: {0}")]
    Support(String),
    #[error("face {face} is a boundary face; use the boundary policy")]
    BoundaryFace { face: usize },
    #[error("field/mesh mismatch: {0}")]
    Mismatch(String),
    #[error("missing flux on face {face}")]
    MissingFlux { face: usize },
    #[error("negative weight {value} at index {index}")]
    NegativeWeight { index: usize, value: f64 },
    #[error("CFL violation: step {step} needs dt <= {limit:e}, got {dt:e}")]
    Cfl { step: usize, dt: f64, limit: f64 },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("regularity unbounded across levels: {names} above {bound} at level {level} ({detail})")]
    Regularity { names: String, detail: String, bound: f64, level: usize },
    #[error("identity violated: {invariant} at {entity}: {detail}")]
    Identity { invariant: &'static str, entity: String, detail: String },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, FvError>;
