use super::dual::DualMeshMAC;
use super::mesh::PrimalMesh;
use super::time::TimeGrid;

/// Mesh and time regularity parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshRegularity {
    /// max diam(P)² / |P|
    pub theta1: f64,
    /// max |P|/|Q| over face-adjacent cells
    pub theta2: f64,
    pub theta3: f64,
    /// MAC quasi-uniformity, when a MAC dual exists.
    pub theta_mac: Option<f64>,
}

impl MeshRegularity {
    pub fn compute(mesh: &PrimalMesh, grid: &TimeGrid) -> Self {
        Self {
            theta1: theta1(mesh),
            theta2: theta2(mesh),
            theta3: grid.theta3(),
            theta_mac: None,
        }
    }

    pub fn with_mac(mut self, dual: &DualMeshMAC) -> Self {
        self.theta_mac = Some(dual.theta());
        self
    }
}

pub fn theta1(mesh: &PrimalMesh) -> f64 {
    mesh.cells().iter().map(|c| c.diameter * c.diameter / c.measure).fold(0.0, f64::max)
}

pub fn theta2(mesh: &PrimalMesh) -> f64 {
    mesh.faces()
        .iter()
        .filter_map(|f| f.right.map(|q| (f.left, q)))
        .map(|(p, q)| {
            let (a, b) = (mesh.cell(p).measure, mesh.cell(q).measure);
            (a / b).max(b / a)
        })
        .fold(1.0, f64::max)
}
