//! Continuous transforms by singularity-aware quadrature, closed-form test
//! families, and the bound constants of the stability estimates.
//!
//! The half-order integral is
//! `J v(x) = (1/sqrt(pi)) int_x^1 v(r) / sqrt(r - x) dr`, and the Abel
//! transform `A u(x) = 2 int_x^1 u(r) r / sqrt(r^2 - x^2) dr` reduces to it
//! through `A u(x) = sqrt(pi) J v(x^2)` with `v(r^2) = u(r)`.

mod family;
mod profile;
mod suite;
mod transforms;

pub use family::{bound_constants, indicator_family, BoundConstants, FamilyNorms, IndicatorFamily};
pub use profile::{random_profiles, FnProfile, PiecewiseConstantProfile, RadialProfile};
pub use suite::{
    loglog_slope, run_bound_suite, running_average_defect, transform_norms,
    transform_norms_by_quadrature, BoundSuiteReport, DecayCheck, InequalityCheck, DECAY_KS,
};
pub use transforms::{
    abel_transform, j_transform, norms_on_unit, running_average, stieltjes_inverse,
    StieltjesInverse, NODES_PER_PIECE,
};
