//! Outer solvers for `A x = f` preconditioned by `B`: conjugate gradients,
//! the three-layer Chebyshev iteration, and estimates of the equivalence
//! constants `γ1 (Bu, u) ≤ (Au, u) ≤ γ2 (Bu, u)`.
//!
//! Operators are passed as [`LinearOperator`] trait objects; the
//! preconditioner argument always applies `B⁻¹`.

mod bounds;
mod chebyshev;
mod pcg;
mod report;

pub use bounds::{estimate_bounds, tridiagonal_eigenvalues, SpectralBounds};
pub use chebyshev::{chebyshev_solve, chebyshev_solve_with};
pub use pcg::{pcg_solve, pcg_solve_with};
pub use report::{IterationReport, IterationSample};

use std::time::Instant;

use thiserror::Error;

use crate::fd::{DiscreteOperator, FdError};
use crate::scalar::Real;
use crate::sov::{SovError, SovPreconditioner};

pub type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Error)]
pub enum IterError {
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error("invalid spectral bounds [{lo}, {hi}]")]
    InvalidBounds { lo: f64, hi: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("breakdown at iteration {iteration}: operator is not positive definite")]
    Breakdown { iteration: usize },
    #[error("no convergence after {iterations} iterations (relative residual {relres:e})")]
    MaxIterExceeded { iterations: usize, relres: f64 },
    #[error("operator failed: {0}")]
    Operator(#[source] BoxError),
}

impl From<FdError> for IterError {
    fn from(e: FdError) -> Self {
        Self::Operator(Box::new(e))
    }
}

impl From<SovError> for IterError {
    fn from(e: SovError) -> Self {
        Self::Operator(Box::new(e))
    }
}

/// A square linear map on vectors of length [`dim`](Self::dim).
pub trait LinearOperator<T> {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[T], out: &mut [T]) -> Result<(), IterError>;
}

/// The positive definite form `−Λ + w` of the scheme.
impl<T: Real> LinearOperator<T> for DiscreteOperator<T> {
    fn dim(&self) -> usize {
        self.grid().unknowns()
    }
    fn apply(&self, x: &[T], out: &mut [T]) -> Result<(), IterError> {
        Ok(self.apply_spd_into(x, out)?)
    }
}

/// As a preconditioner: applies `B⁻¹`.
impl<T: Real> LinearOperator<T> for SovPreconditioner<T> {
    fn dim(&self) -> usize {
        self.grid().unknowns()
    }
    fn apply(&self, x: &[T], out: &mut [T]) -> Result<(), IterError> {
        Ok(self.apply_binv_into(x, out)?)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl<T: Real> LinearOperator<T> for Identity {
    fn dim(&self) -> usize {
        self.0
    }
    fn apply(&self, x: &[T], out: &mut [T]) -> Result<(), IterError> {
        out.copy_from_slice(x);
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Diagonal<T>(pub Vec<T>);

impl<T: Real> LinearOperator<T> for Diagonal<T> {
    fn dim(&self) -> usize {
        self.0.len()
    }
    fn apply(&self, x: &[T], out: &mut [T]) -> Result<(), IterError> {
        for ((o, &d), &v) in out.iter_mut().zip(&self.0).zip(x) {
            *o = d * v;
        }
        Ok(())
    }
}

/// Wraps a closure `(x, out) ↦ out = M x`.
pub struct FnOperator<F> {
    pub dim: usize,
    pub f: F,
}

impl<T, F: Fn(&[T], &mut [T]) -> Result<(), IterError>> LinearOperator<T> for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, x: &[T], out: &mut [T]) -> Result<(), IterError> {
        (self.f)(x, out)
    }
}

/// Outer method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    #[default]
    Pcg,
    Chebyshev,
}

impl std::str::FromStr for SolverKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pcg" => Ok(Self::Pcg),
            "chebyshev" => Ok(Self::Chebyshev),
            _ => Err(format!("unknown solver `{s}` (expected pcg or chebyshev)")),
        }
    }
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Pcg => "pcg",
            Self::Chebyshev => "chebyshev",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub maxiter: usize,
    /// Chebyshev: residual norm every this many steps.
    pub check_every: usize,
    /// Record wall-clock seconds in the history; zero otherwise.
    pub clock: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            maxiter: 1000,
            check_every: 8,
            clock: false,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<(), IterError> {
        if !(self.tol > 0.0) {
            return Err(IterError::InvalidOptions(format!("tol must be positive, got {}", self.tol)));
        }
        if self.check_every == 0 {
            return Err(IterError::InvalidOptions("check_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Result of a converged solve.
#[derive(Debug, Clone)]
pub struct Solve<T> {
    pub x: Vec<T>,
    pub report: IterationReport,
}

pub(crate) fn check_dims<T>(a: &dyn LinearOperator<T>, b: &dyn LinearOperator<T>, f: &[T]) -> Result<usize, IterError> {
    let n = a.dim();
    for d in [b.dim(), f.len()] {
        if d != n {
            return Err(IterError::DimensionMismatch { expected: n, found: d });
        }
    }
    Ok(n)
}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

pub(crate) struct Clock(Option<Instant>);

impl Clock {
    pub(crate) fn new(on: bool) -> Self {
        Self(on.then(Instant::now))
    }
    pub(crate) fn seconds(&self) -> f64 {
        self.0.map_or(0.0, |t| t.elapsed().as_secs_f64())
    }
}
