//! Total-variation regularized inversion of the Abel transform.
//!
//! The crate is organised bottom-up:
//!
//! - [`grid`]: cylindrical and Cartesian grids, field containers, revolution.
//! - [`operators`]: onion-peeling Abel matrix, discrete gradient and divergence.
//! - [`analytic`]: continuous transforms, closed-form families, bound constants.
//! - [`solver`]: primal-dual iteration for the regularized problem and the
//!   unregularized back-substitution baseline.
//! - [`phantoms`]: synthetic densities and the Gaussian noise model.
//! - [`metrics`]: discrete norms and the error-bound report.
//!
//! ```
//! use abel_tv::grid::{make_grids, RadialField};
//! use abel_tv::operators::{apply_abel, build_abel_matrix};
//! use abel_tv::solver::solve_onion_peeling;
//!
//! let (grid, _) = make_grids(32)?;
//! let a = build_abel_matrix(&grid);
//! let u = RadialField::from_fn(grid, |j, _| if j < 16 { 1.0 } else { 0.0 })?;
//! let f = apply_abel(&a, &u)?;
//! let back = solve_onion_peeling(&a, &f)?;
//! assert!((back.values() - u.values()).amax() < 1e-12);
//! # Ok::<(), abel_tv::Error>(())
//! ```

pub mod analytic;
mod error;
pub mod grid;
pub mod metrics;
pub mod operators;
pub mod phantoms;
pub mod solver;

pub use error::{Error, Result};

// Compile the guide's code listings as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/grids.md")]
    mod grids {}
    #[doc = include_str!("../../../book/src/onion-peeling.md")]
    mod onion_peeling {}
    #[doc = include_str!("../../../book/src/half-order-integral.md")]
    mod half_order_integral {}
    #[doc = include_str!("../../../book/src/stability-bounds.md")]
    mod stability_bounds {}
    #[doc = include_str!("../../../book/src/phantoms.md")]
    mod phantoms {}
    #[doc = include_str!("../../../book/src/primal-dual.md")]
    mod primal_dual {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
