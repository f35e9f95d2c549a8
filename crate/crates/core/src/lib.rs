//! Numerics for hierarchical model reduction of 2D advection-diffusion
//! problems whose solutions carry an interface skewed against the axes.
//!
//! The crate is `no_std` (it needs `alloc`). Data functions are passed as
//! callbacks, every discrete object lives on a uniform tensor grid
//! `Ω = (x0, x1) × (y0, y1)` with `x` the dominant direction.
//!
//! Overview of the pipeline:
//!
//! 1. [`interface`] locates an interface from a data function and turns it
//!    into a [`problem::LiftingFunction`].
//! 2. [`problem`] assembles and solves the bilinear Q1 reference system.
//! 3. [`transverse`] builds the coupled parametrized 1D problems whose
//!    solutions are the snapshots.
//! 4. [`rb`] runs the adaptive training-set extension and the POD.
//! 5. [`reduced`] solves the reduced problem in `X^H ⊗ Y_m`.
//! 6. [`estimator`] evaluates the Riesz-representative error bound and the
//!    relative error norms.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod cases;
pub mod error;
pub mod estimator;
pub mod interface;
pub mod linalg;
pub mod mesh;
pub mod problem;
pub mod rb;
pub mod reduced;
pub mod transverse;

pub use error::{Error, Result};
pub use mesh::{Partition1D, TensorGrid};
pub use problem::{LiftingFunction, LiftingMode, ProblemData, ScalarField};
