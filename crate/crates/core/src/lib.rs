//! Numerical laboratory for Brownian exit problems in planar domains.
//!
//! * [`geometry`]: domain catalogue and geometric predicates.
//! * [`conformal`]: the explicit map from the Grim Reaper domain onto the
//!   upper half-plane and the exact exit law it yields.
//! * [`sampler`]: walk-on-spheres exit positions, Euler exit times, survival curves.
//! * [`spectral`]: principal Dirichlet eigenvalue and torsion function on grids.
//! * [`analysis`]: goodness of fit, rate regression, and bound certificates.
//! * [`cli`]: the batch driver behind the `csep` binary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod conformal;
pub mod error;
pub mod geometry;
pub mod io;
pub mod sampler;
pub mod spectral;

pub use error::{Error, Result};
pub use geometry::{DomainSpec, Interval, Point};
