//! Finite-volume weak-consistency laboratory.
//!
//! Builds colocated and staggered (RT, MAC) discretisations of the convection
//! operator `∂_t β(q) + div(g(q) v)`, evaluates the consistency residuals that
//! control its weak limit, and runs refinement studies measuring their decay.

pub mod consistency;
pub mod error;
pub mod exec;
pub mod fields;
pub mod geometry;
pub mod operators;
pub mod quadrature;
pub mod schemes;

#[cfg(test)]
mod oracle;

pub use error::{FvError, Result};
