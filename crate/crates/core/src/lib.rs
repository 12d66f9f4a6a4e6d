//! Elliptic solvers for axisymmetric problems with variable coefficients.
//!
//! The crate is organised bottom-up:
//!
//! * [`tridiag`]: bands, Thomas solves, residuals.
//! * [`comm`]: SPMD message passing with a deterministic simulator and a
//!   threaded executor.
//! * [`dichotomy`]: the divide-and-conquer tridiagonal solver for many
//!   right-hand sides with one matrix.
//! * [`fd`]: the five-point finite-volume scheme in `(r, z)`.
//! * [`sov`]: the separation-of-variables preconditioner.
//! * [`iterative`]: preconditioned CG, Chebyshev iteration, spectral bounds.
//! * [`laguerre`]: Laguerre-transform acoustic modelling.

// `!(x > 0)` deliberately rejects NaN; index loops mirror the stencils
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod comm;
pub mod dichotomy;
pub mod fd;
pub mod iterative;
pub mod laguerre;
pub mod scalar;
pub mod sov;
pub mod tridiag;

pub use scalar::{Real, Scalar};

use num_rational::BigRational;

pub type Tridiagonal64 = tridiag::TridiagonalMatrix<f64>;
pub type Tridiagonal32 = tridiag::TridiagonalMatrix<f32>;
pub type TridiagonalExact = tridiag::TridiagonalMatrix<BigRational>;
pub type Plan64 = dichotomy::DichotomyPlan<f64>;
pub type PlanExact = dichotomy::DichotomyPlan<BigRational>;
pub type Operator64 = fd::DiscreteOperator<f64>;
pub type Precond64 = sov::SovPreconditioner<f64>;
pub type Series64 = laguerre::LaguerreSeries<f64>;
