//! Primal meshes, staggered duals, time grids and regularity parameters.

pub mod dual;
pub mod io;
pub mod mesh;
pub mod regularity;
pub mod time;

pub use dual::{Direction, DualEdge, DualMeshMAC, DualMeshRT, OppositePair};
pub use io::{read_mesh, write_mesh};
pub use mesh::{BoxDomain, Cell, Face, FaceRecord, Lattice, Point, PrimalMesh};
pub use regularity::MeshRegularity;
pub use time::{StepPattern, TimeGrid};
