//! Separation-of-variables preconditioner.
//!
//! `B = −Ṽ (Λr + Λz) + d` (positive definite form) has constant coefficient
//! `Ṽ` and shift `d(i, k) = r_i c`. The cosine transform in `z` splits
//! `B y = f` into one tridiagonal system along `r` per cosine mode, which is
//! solved with Thomas on one rank or with the dichotomy solver on several.

mod dct;
mod fft;
mod precond;

pub use dct::{dct_forward, dct_inverse, DctPlan};
pub use fft::FftPlan;
pub use precond::{analytic_bounds, mode_eigenvalue, ShiftMode, SovOptions, SovPreconditioner, VtildeMode};

use thiserror::Error;

use crate::dichotomy::DichotomyError;
use crate::fd::FdError;
use crate::tridiag::TridiagError;

#[derive(Debug, Error)]
pub enum SovError {
    #[error("invalid preconditioner setup: {0}")]
    Config(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Fd(#[from] FdError),
    #[error(transparent)]
    Tridiag(#[from] TridiagError),
    #[error(transparent)]
    Dichotomy(#[from] DichotomyError),
}
