//! Parabolic initial-value problems on the unit sphere S², solved by
//! Laplace-transform quadrature along a hyperbolic contour in time and a
//! Galerkin method with spherical radial basis functions (SRBFs) in space.
//!
//! The pipeline for the homogeneous heat equation `u_t - Δ*u = 0` is:
//!
//! 1. place centers on the sphere ([`geometry::generate_equal_area`]),
//! 2. pick a Wendland kernel ([`kernel::ZonalKernel`]) and a surface
//!    quadrature ([`quadrature::SphereQuadrature`]),
//! 3. assemble mass and stiffness matrices ([`assembly::GalerkinSystem`]),
//! 4. build the contour ([`contour::ContourPlan`]) and solve one complex
//!    linear system per quadrature node ([`solver::solve_parabolic`]).
//!
//! The node solves are independent of each other and of the evaluation
//! time, so a single set of solves serves every requested `t`.
//!
//! With the default `parallel` feature the hot loops run on rayon; without
//! it the same code paths run sequentially and produce identical results.

// `!(x > 0.0)` is used on purpose: NaN must fail range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod contour;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod kernel;
pub mod legendre;
pub mod par;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
pub use num_complex::Complex64;
