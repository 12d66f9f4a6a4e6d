//! Scalar abstractions.
//!
//! The tridiagonal kernel, the communicator and the dichotomy solver only need
//! field arithmetic, so they are generic over [`Scalar`], which is implemented
//! for `f32`, `f64` and exact [`BigRational`]. Everything that needs
//! transcendental functions (finite differences, transforms, Krylov methods,
//! Laguerre functions) is generic over [`Real`].

use std::fmt;
use std::ops::Neg;

use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive, Zero};

/// Field arithmetic plus the thresholds the direct solvers use to detect
/// breakdown.
pub trait Scalar: Clone + PartialOrd + fmt::Debug + Num + Neg<Output = Self> + FromPrimitive + ToPrimitive + Send + Sync + 'static {
    /// Forward-elimination pivots with magnitude below this are rejected.
    fn pivot_floor() -> Self;

    /// Denominators of the boundary-ratio terms in the dichotomy below this
    /// magnitude are rejected.
    fn ratio_floor() -> Self;

    fn magnitude(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// True when `self` is zero, NaN, or smaller in magnitude than `floor`.
    fn is_negligible(&self, floor: &Self) -> bool {
        let m = self.magnitude();
        m.is_zero() || !(m >= *floor)
    }
}

impl Scalar for f64 {
    fn pivot_floor() -> Self {
        1e-300
    }
    fn ratio_floor() -> Self {
        1e-280
    }
    fn magnitude(&self) -> Self {
        self.abs()
    }
}

impl Scalar for f32 {
    fn pivot_floor() -> Self {
        f32::MIN_POSITIVE
    }
    fn ratio_floor() -> Self {
        f32::MIN_POSITIVE
    }
    fn magnitude(&self) -> Self {
        self.abs()
    }
}

impl Scalar for BigRational {
    fn pivot_floor() -> Self {
        BigRational::zero()
    }
    fn ratio_floor() -> Self {
        BigRational::zero()
    }
}

/// Floating-point scalars.
pub trait Real: Scalar + Float + FloatConst + Copy + fmt::Display + fmt::LowerExp {
    /// Machine epsilon as an `f64`, for tolerance arithmetic.
    fn eps_f64() -> f64 {
        <Self as Float>::epsilon().to_f64().unwrap_or(f64::EPSILON)
    }
}

impl Real for f64 {}
impl Real for f32 {}

/// Converts an `f64` literal into `T`.
///
/// Panics only if `T` cannot represent finite `f64` values, which is not the
/// case for any scalar in this crate.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("scalar literal")
}

/// Converts an index or count into `T`.
#[inline]
pub fn from_usize<T: Scalar>(n: usize) -> T {
    T::from_usize(n).expect("scalar from usize")
}
