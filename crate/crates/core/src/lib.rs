//! Numerical laboratory for the first Robin p-Laplacian eigenvalue with a
//! negative boundary parameter and its `p -> infinity` behavior.
//!
//! - [`geometry`]: domains, grids, quadrature and boundary distance.
//! - [`radial`]: shooting solver for interval, ball and shell.
//! - [`variational`]: Rayleigh quotient minimization on any grid.
//! - [`asymptotics`]: p-sweeps, large-beta expansion, shell versus ball.
//! - [`viscosity`]: pointwise checks of the limit infinity-Laplacian problem.

// `!(x > 0.0)` is used on purpose so NaN is rejected along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod geometry;
pub mod radial;
pub mod variational;
pub mod viscosity;

pub use error::{Error, Result};
