//! Five-point finite-volume scheme for
//!
//! ```text
//! (1/r) ∂r(r κ ∂r u) + ∂z(κ ∂z u) − q u = −f,   0 < r < l1, 0 < z < l2
//! ```
//!
//! with `∂u/∂r = 0` on the axis, `∂u/∂z = 0` at `z = 0` and `z = l2`, and
//! `u = 0` at `r = l1`. The equation is multiplied by `r`, which makes the
//! discrete operator symmetric.
//!
//! Nodes sit at `r_i = (i + ½) h1`, `z_k = (k + ½) h2` for 0-based `i < N1`,
//! `k < N2`, with `h1 = l1 / (N1 − ½)` and `h2 = l2 / (N2 − ½)`; the column
//! `i = N1 − 1` lies on `r = l1` and carries the Dirichlet value, so the
//! unknowns are `i < N1 − 1`. Unknown `(i, k)` is stored at
//! `k (N1 − 1) + i`: radial lines are contiguous.

mod grid_io;

pub use grid_io::{read_model, read_model_raw, read_model_text, write_model_raw, write_model_text, ModelGrid};

use thiserror::Error;

use crate::scalar::{from_usize, lit, Real};

#[derive(Debug, Error)]
pub enum FdError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("coefficient κ = {value} is not positive at node ({i}, {k})")]
    NonPositiveCoefficient { i: usize, k: usize, value: f64 },
    #[error("negative reaction coefficient q = {value} at node ({i}, {k})")]
    NegativeReaction { i: usize, k: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("exact solution violates the boundary conditions: {0}")]
    BoundaryViolation(String),
    #[error("model file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A pointwise coefficient `(r, z) ↦ value`.
pub type Sampler<'a, T> = &'a (dyn Fn(T, T) -> T + Sync);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D<T> {
    n1: usize,
    n2: usize,
    l1: T,
    l2: T,
    h1: T,
    h2: T,
}

impl<T: Real> Grid2D<T> {
    pub fn new(n1: usize, n2: usize, l1: T, l2: T) -> Result<Self, FdError> {
        if n1 < 2 || n2 < 2 {
            return Err(FdError::InvalidGrid(format!("need N1, N2 >= 2, got {n1} x {n2}")));
        }
        if !(l1 > T::zero() && l2 > T::zero()) {
            return Err(FdError::InvalidGrid("extents must be positive".into()));
        }
        let half = lit::<T>(0.5);
        Ok(Self {
            n1,
            n2,
            l1,
            l2,
            h1: l1 / (from_usize::<T>(n1) - half),
            h2: l2 / (from_usize::<T>(n2) - half),
        })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn l1(&self) -> T {
        self.l1
    }

    pub fn l2(&self) -> T {
        self.l2
    }

    pub fn h1(&self) -> T {
        self.h1
    }

    pub fn h2(&self) -> T {
        self.h2
    }

    /// Unknowns per radial line, `N1 − 1`.
    pub fn nr(&self) -> usize {
        self.n1 - 1
    }

    pub fn unknowns(&self) -> usize {
        (self.n1 - 1) * self.n2
    }

    pub fn index(&self, i: usize, k: usize) -> usize {
        k * (self.n1 - 1) + i
    }

    pub fn r(&self, i: usize) -> T {
        (from_usize::<T>(i) + lit(0.5)) * self.h1
    }

    pub fn z(&self, k: usize) -> T {
        (from_usize::<T>(k) + lit(0.5)) * self.h2
    }

    /// `r̄_i = r_i + h1/2`.
    pub fn r_bar(&self, i: usize) -> T {
        from_usize::<T>(i + 1) * self.h1
    }

    /// `z̄_k = z_k + h2/2`.
    pub fn z_bar(&self, k: usize) -> T {
        from_usize::<T>(k + 1) * self.h2
    }

    /// Discrete L2 norm `sqrt(Σ v² h1 h2)` of a grid vector.
    pub fn l2_norm(&self, v: &[T]) -> T {
        let s = v.iter().fold(T::zero(), |acc, &x| acc + x * x);
        (s * self.h1 * self.h2).sqrt()
    }

    /// Values of `g` at the unknown nodes.
    pub fn sample(&self, g: Sampler<'_, T>) -> Vec<T> {
        let mut out = Vec::with_capacity(self.unknowns());
        for k in 0..self.n2 {
            for i in 0..self.nr() {
                out.push(g(self.r(i), self.z(k)));
            }
        }
        out
    }

    /// The node nearest to `(r, z)`, clamped to the unknowns.
    pub fn nearest(&self, r: T, z: T) -> (usize, usize) {
        let snap = |x: T, h: T, n: usize| -> usize {
            let t = (x / h - lit(0.5)).round();
            if !(t > T::zero()) {
                0
            } else {
                t.to_usize().unwrap_or(usize::MAX).min(n - 1)
            }
        };
        (snap(r, self.h1, self.nr()), snap(z, self.h2, self.n2))
    }
}

/// Bounds of sampled coefficients: `s1 ≤ κ ≤ s2`, `d1 ≤ q ≤ d2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientBounds<T> {
    pub s1: T,
    pub s2: T,
    pub d1: T,
    pub d2: T,
}

/// Assembled scheme arrays. `a1(i, k) = r̄_i κ(r̄_i, z_k)` is the flux
/// weight between `i` and `i + 1`, `a2(i, k) = r_i κ(r_i, z̄_k)` the weight
/// between `k` and `k + 1`, `w = r q`, `φ = r f`.
///
/// `apply_a` evaluates `(Λr + Λz) y − w y`, which is negative definite. The
/// solvers work with its negation, see [`DiscreteOperator::apply_spd`].
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator<T> {
    grid: Grid2D<T>,
    a1: Vec<T>,
    a2: Vec<T>,
    w: Vec<T>,
    phi: Vec<T>,
    bounds: CoefficientBounds<T>,
}

impl<T: Real> DiscreteOperator<T> {
    pub fn assemble(grid: Grid2D<T>, kappa: Sampler<'_, T>, q: Sampler<'_, T>, f: Sampler<'_, T>) -> Result<Self, FdError> {
        let nr = grid.nr();
        let nu = grid.unknowns();
        let mut a1 = Vec::with_capacity(nu);
        let mut a2 = Vec::with_capacity(nu);
        let mut w = Vec::with_capacity(nu);
        let mut phi = Vec::with_capacity(nu);
        let mut s1 = T::infinity();
        let mut s2 = T::neg_infinity();
        let mut d1 = T::infinity();
        let mut d2 = T::neg_infinity();
        let positive = |v: T, i: usize, k: usize| -> Result<T, FdError> {
            if v > T::zero() && v.is_finite() {
                Ok(v)
            } else {
                Err(FdError::NonPositiveCoefficient {
                    i,
                    k,
                    value: v.to_f64().unwrap_or(f64::NAN),
                })
            }
        };
        for k in 0..grid.n2 {
            for i in 0..nr {
                let (r, z) = (grid.r(i), grid.z(k));
                let kc = positive(kappa(r, z), i, k)?;
                let kr = positive(kappa(grid.r_bar(i), z), i, k)?;
                // the last z-face lies outside the domain and is never used
                let kz = if k + 1 < grid.n2 { positive(kappa(r, grid.z_bar(k)), i, k)? } else { kc };
                let qv = q(r, z);
                if !(qv >= T::zero()) {
                    return Err(FdError::NegativeReaction {
                        i,
                        k,
                        value: qv.to_f64().unwrap_or(f64::NAN),
                    });
                }
                for v in [kr, kz, kc] {
                    s1 = s1.min(v);
                    s2 = s2.max(v);
                }
                d1 = d1.min(qv);
                d2 = d2.max(qv);
                a1.push(grid.r_bar(i) * kr);
                a2.push(r * kz);
                w.push(r * qv);
                phi.push(r * f(r, z));
            }
        }
        Ok(Self {
            grid,
            a1,
            a2,
            w,
            phi,
            bounds: CoefficientBounds { s1, s2, d1, d2 },
        })
    }

    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }

    pub fn a1(&self) -> &[T] {
        &self.a1
    }

    pub fn a2(&self) -> &[T] {
        &self.a2
    }

    pub fn w(&self) -> &[T] {
        &self.w
    }

    /// Right-hand side `φ = r f` of `(Λr + Λz) y − w y = −φ`.
    pub fn phi(&self) -> &[T] {
        &self.phi
    }

    pub fn bounds(&self) -> CoefficientBounds<T> {
        self.bounds
    }

    /// Replaces `φ` with `r f` for a new source.
    pub fn set_source(&mut self, f: Sampler<'_, T>) {
        let g = self.grid;
        for k in 0..g.n2 {
            for i in 0..g.nr() {
                self.phi[g.index(i, k)] = g.r(i) * f(g.r(i), g.z(k));
            }
        }
    }

    /// `(Λr + Λz) y − w y`.
    pub fn apply_a(&self, y: &[T]) -> Result<Vec<T>, FdError> {
        let mut out = vec![T::zero(); y.len()];
        self.apply_spd_into(y, &mut out)?;
        for v in &mut out {
            *v = -*v;
        }
        Ok(out)
    }

    /// `−(Λr + Λz) y + w y`, the symmetric positive definite form.
    pub fn apply_spd(&self, y: &[T]) -> Result<Vec<T>, FdError> {
        let mut out = vec![T::zero(); y.len()];
        self.apply_spd_into(y, &mut out)?;
        Ok(out)
    }

    pub fn apply_spd_into(&self, y: &[T], out: &mut [T]) -> Result<(), FdError> {
        let g = &self.grid;
        let nu = g.unknowns();
        for len in [y.len(), out.len()] {
            if len != nu {
                return Err(FdError::DimensionMismatch { expected: nu, found: len });
            }
        }
        let nr = g.nr();
        let n2 = g.n2;
        let ih1 = T::one() / (g.h1 * g.h1);
        let ih2 = T::one() / (g.h2 * g.h2);
        for k in 0..n2 {
            let row = k * nr;
            for i in 0..nr {
                let c = row + i;
                let yc = y[c];
                // radial fluxes; a1 on the axis side of i = 0 vanishes, the
                // neighbour beyond i = nr − 1 is the zero boundary value
                let mut lr = -self.a1[c] * yc;
                if i + 1 < nr {
                    lr = lr + self.a1[c] * y[c + 1];
                }
                if i > 0 {
                    lr = lr - self.a1[c - 1] * (yc - y[c - 1]);
                }
                let mut lz = T::zero();
                if k + 1 < n2 {
                    lz = lz + self.a2[c] * (y[c + nr] - yc);
                }
                if k > 0 {
                    lz = lz - self.a2[c - nr] * (yc - y[c - nr]);
                }
                out[c] = self.w[c] * yc - lr * ih1 - lz * ih2;
            }
        }
        Ok(())
    }

    /// Residual `‖(−Λ + w) y − φ‖₂ / ‖φ‖₂`; the absolute norm when `φ = 0`.
    pub fn residual_relnorm(&self, y: &[T]) -> Result<T, FdError> {
        let ay = self.apply_spd(y)?;
        let num = ay.iter().zip(&self.phi).fold(T::zero(), |s, (&a, &b)| s + (a - b) * (a - b));
        let den = self.phi.iter().fold(T::zero(), |s, &b| s + b * b);
        if den == T::zero() {
            return Ok(num.sqrt());
        }
        Ok((num / den).sqrt())
    }

    /// Bit-level hash of the stored coefficients (not of `φ`).
    pub fn checksum(&self) -> u64 {
        use std::hash::{DefaultHasher, Hasher};
        let mut h = DefaultHasher::new();
        for v in self.a1.iter().chain(&self.a2).chain(&self.w) {
            h.write_u64(v.to_f64().unwrap_or(f64::NAN).to_bits());
        }
        h.finish()
    }
}

/// Output of [`manufactured_problem`].
#[derive(Debug, Clone)]
pub struct Manufactured<T> {
    pub op: DiscreteOperator<T>,
    /// `φ = r f` at the unknowns.
    pub rhs: Vec<T>,
    pub exact: Vec<T>,
}

/// Builds the scheme for a prescribed smooth solution.
///
/// `f = −[(1/r) ∂r(r κ ∂r u) + ∂z(κ ∂z u) − q u]` is obtained by nested
/// five-point central differences of `exact` and `kappa`. The boundary
/// conditions are checked at sample points first.
pub fn manufactured_problem<T: Real>(grid: Grid2D<T>, exact: Sampler<'_, T>, kappa: Sampler<'_, T>, q: Sampler<'_, T>) -> Result<Manufactured<T>, FdError> {
    check_boundary(&grid, exact)?;
    let delta = (grid.l1.min(grid.l2) * lit(1e-3)).min(grid.h1 / lit(8.0)).min(grid.h2 / lit(8.0));
    let d = |g: &dyn Fn(T) -> T, x: T| -> T {
        let (d1, d2) = (delta, delta + delta);
        (g(x - d2) - lit::<T>(8.0) * g(x - d1) + lit::<T>(8.0) * g(x + d1) - g(x + d2)) / (lit::<T>(12.0) * delta)
    };
    let f = |r: T, z: T| -> T {
        let flux_r = |rr: T| rr * kappa(rr, z) * d(&|s| exact(s, z), rr);
        let flux_z = |zz: T| kappa(r, zz) * d(&|s| exact(r, s), zz);
        -(d(&flux_r, r) / r + d(&flux_z, z) - q(r, z) * exact(r, z))
    };
    manufactured_with_source(grid, exact, kappa, q, &f)
}

/// Like [`manufactured_problem`] with a caller-supplied source `f`.
pub fn manufactured_with_source<T: Real>(
    grid: Grid2D<T>,
    exact: Sampler<'_, T>,
    kappa: Sampler<'_, T>,
    q: Sampler<'_, T>,
    f: Sampler<'_, T>,
) -> Result<Manufactured<T>, FdError> {
    check_boundary(&grid, exact)?;
    let op = DiscreteOperator::assemble(grid, kappa, q, f)?;
    Ok(Manufactured {
        rhs: op.phi.clone(),
        exact: grid.sample(exact),
        op,
    })
}

fn check_boundary<T: Real>(grid: &Grid2D<T>, exact: Sampler<'_, T>) -> Result<(), FdError> {
    let tol = 1e-8;
    let samples = 17;
    let frac = |j: usize| from_usize::<T>(j) / from_usize::<T>(samples - 1);
    let val = |r: T, z: T| exact(r, z).to_f64().unwrap_or(f64::NAN);
    let mut scale: f64 = 1.0;
    for a in 0..samples {
        for b in 0..samples {
            scale = scale.max(val(frac(a) * grid.l1, frac(b) * grid.l2).abs());
        }
    }
    // z-derivatives in the scaled variable z / l2, one-sided second order
    let eps = lit::<T>(1e-5) * grid.l2;
    for j in 0..samples {
        let r = frac(j) * grid.l1;
        let z = frac(j) * grid.l2;
        let at_wall = val(grid.l1, z);
        if !(at_wall.abs() <= tol * scale) {
            return Err(FdError::BoundaryViolation(format!("u(l1, {z}) = {at_wall:e}")));
        }
        for (zb, sign) in [(T::zero(), T::one()), (grid.l2, -T::one())] {
            let u0 = val(r, zb);
            let u1 = val(r, zb + sign * eps);
            let u2 = val(r, zb + sign * (eps + eps));
            let du = (-3.0 * u0 + 4.0 * u1 - u2) / 2e-5;
            if !(du.abs() <= tol * scale) {
                return Err(FdError::BoundaryViolation(format!("∂u/∂z({r}, {zb}) ≠ 0 (scaled slope {du:e})")));
            }
        }
    }
    Ok(())
}
