//! Discrete time derivative, numerical fluxes and the convection operator.

mod assemble;
mod flux;
mod nonlinearity;

pub use assemble::{assemble_convection, cell_flux_sum, conservation_defect, dt_beta, Convection};
pub use flux::{
    face_value, face_value_from, flux_at_level, flux_colocated_upwind_1d, flux_defect, flux_staggered, local_flux_pieces, mean_flux,
    BoundaryPolicy, FaceScheme, FluxFamily, Layout, LayoutKind, Velocity,
};
pub use nonlinearity::{Nonlinearity, NonlinearityPair, ENTROPY_EPS};
