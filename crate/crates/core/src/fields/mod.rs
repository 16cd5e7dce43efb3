//! Discrete fields, test functions, interpolates, norms and translate functionals.

mod discrete;
mod interp;
mod test_fn;
mod translate;

pub use discrete::{CellScalarField, FaceScalarField, FaceVectorField};
pub use interp::{
    interpolate_test, lp_distance, lp_distance_mac, sample_cell_means, weighted_mean, InterpVariant,
    InterpolatedTest, LpDistance, Sampled,
};
pub use test_fn::{bump, check_support, AffinePatch, Bump, Smoothness, Support, TestFunction, ZeroTest};
pub use translate::{
    pair_gap, translate_functional, translate_functional_general, FaceStepWeights, GeneralTranslateValue,
    PairWeights, TranslateValue,
};
