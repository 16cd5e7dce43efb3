//! Discrete solution sequences: manufactured sampling and explicit upwind runs.

mod explicit;
mod profile;

pub use explicit::{
    cfl_limit, run_mass_mac, run_upwind_1d, sample_manufactured, sample_velocity, Manufactured, RunLog, SchemeConfig,
    SchemeRun, StepRecord,
};
pub use profile::{ScalarProfile, VectorProfile};

#[cfg(test)]
mod tests;
