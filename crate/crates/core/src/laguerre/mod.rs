//! Laguerre-transform acoustic modelling.
//!
//! The wave equation `ρ⁻² u_tt = ∇(V ∇u) + δ(x − x0) f(t)` with zero initial
//! data is expanded in time as `u = (ht)^{α/2} Σ Q_m l^α_m(ht)`. Each
//! harmonic solves
//!
//! ```text
//! ∇(V ∇Q_m) − h²/(4ρ²) Q_m = −δ f_m + h²/ρ² √(m!/(m+α)!) Σ_{k<m} (m−k) √((k+α)!/k!) Q_k
//! ```
//!
//! with one operator for every `m`, so the preconditioner and its plans are
//! built once.

mod functions;
mod harmonics;
mod medium;
mod projection;

pub(crate) use functions::reconstruct_weights;
pub use functions::{gauss_legendre, laguerre_function_row, weighted_laguerre_row};
pub use harmonics::{harmonic_rhs, solve_all_harmonics, AcousticConfig, HarmonicSums, LaguerreSeries};
pub use medium::{FaultParams, MediumModel};
pub use projection::{project_signal, project_source, reconstruct_signal, Wavelet};

use thiserror::Error;

use crate::fd::FdError;
use crate::iterative::IterError;
use crate::scalar::Real;
use crate::sov::SovError;

#[derive(Debug, Error)]
pub enum LaguerreError {
    #[error("invalid Laguerre parameters: {0}")]
    InvalidParams(String),
    #[error("Laguerre recurrence overflowed at m = {m}")]
    Overflow { m: usize },
    #[error("source projection did not converge with {panels} panels")]
    QuadratureNotConverged { panels: usize },
    #[error("invalid medium: {0}")]
    Medium(String),
    #[error("harmonic {m}: {source}")]
    Harmonic {
        m: usize,
        #[source]
        source: IterError,
    },
    #[error("operator changed between harmonics")]
    OperatorChanged,
    #[error(transparent)]
    Fd(#[from] FdError),
    #[error(transparent)]
    Sov(#[from] SovError),
    #[error(transparent)]
    Iter(#[from] IterError),
}

/// Transform parameter `h` (1/s), integer `α ≥ 2` and series length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaguerreParams<T> {
    pub h: T,
    pub alpha: u32,
    pub n_terms: usize,
}

impl<T: Real> LaguerreParams<T> {
    pub fn new(h: T, alpha: u32, n_terms: usize) -> Result<Self, LaguerreError> {
        if !(h > T::zero()) || !h.is_finite() {
            return Err(LaguerreError::InvalidParams(format!("h must be positive, got {h}")));
        }
        if alpha < 2 {
            return Err(LaguerreError::InvalidParams(format!("alpha must be at least 2, got {alpha}")));
        }
        if n_terms == 0 {
            return Err(LaguerreError::InvalidParams("at least one term is required".into()));
        }
        Ok(Self { h, alpha, n_terms })
    }
}

/// `½ Σ_{j=1..α} ln(k + j) = ½ ln((k+α)!/k!)`.
pub(crate) fn half_log_rising<T: Real>(k: usize, alpha: u32) -> T {
    let s = (1..=alpha as usize).fold(T::zero(), |s, j| s + T::from(k + j).unwrap_or_else(T::max_value).ln());
    s / crate::scalar::lit(2.0)
}

#[cfg(test)]
mod tests;
