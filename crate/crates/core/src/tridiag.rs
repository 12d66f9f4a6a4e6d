//! Sequential tridiagonal algebra: storage, slicing, Thomas solves and
//! residuals. This is both the local kernel of the dichotomy solver and the
//! oracle it is tested against.
//!
//! # Band layout
//!
//! A matrix of order `n` is written in the usual 1-based form
//!
//! ```text
//! | b_1  a_1                      |
//! | c_2  b_2  a_2                 |
//! |      ...  ...  ...            |
//! |           c_n-1 b_n-1 a_n-1   |
//! |                 c_n   b_n     |
//! ```
//!
//! and stored in three 0-based vectors:
//!
//! * `diag[i]  = b_{i+1}`, `i in 0..n`
//! * `upper[i] = a_{i+1}`, `i in 0..n-1`, couples row `i` to row `i + 1`
//! * `lower[i] = c_{i+2}`, `i in 0..n-1`, couples row `i + 1` to row `i`
//!
//! All other indices in this module (rows, `submatrix` bounds) are 0-based.

use thiserror::Error;

use crate::scalar::{Real, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TridiagError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("zero pivot at row {row}")]
    ZeroPivot { row: usize },
    #[error("index range {first}..={last} out of bounds for order {n}")]
    IndexOutOfRange { first: usize, last: usize, n: usize },
    #[error("right-hand side has zero norm")]
    ZeroRhs,
    #[error("matrix order must be at least 1")]
    Empty,
}

/// A tridiagonal matrix stored by bands.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalMatrix<T> {
    lower: Vec<T>,
    diag: Vec<T>,
    upper: Vec<T>,
}

impl<T: Scalar> TridiagonalMatrix<T> {
    /// Builds a matrix from its bands. `lower` and `upper` must have length
    /// `diag.len() - 1`.
    pub fn new(lower: Vec<T>, diag: Vec<T>, upper: Vec<T>) -> Result<Self, TridiagError> {
        let n = diag.len();
        if n == 0 {
            return Err(TridiagError::Empty);
        }
        for band in [&lower, &upper] {
            if band.len() != n - 1 {
                return Err(TridiagError::DimensionMismatch {
                    expected: n - 1,
                    found: band.len(),
                });
            }
        }
        Ok(Self { lower, diag, upper })
    }

    /// Constant-band matrix `tridiag(sub, main, sup)` of order `n`.
    pub fn constant(n: usize, sub: T, main: T, sup: T) -> Result<Self, TridiagError> {
        if n == 0 {
            return Err(TridiagError::Empty);
        }
        Self::new(vec![sub; n - 1], vec![main; n], vec![sup; n - 1])
    }

    pub fn identity(n: usize) -> Result<Self, TridiagError> {
        Self::constant(n, T::zero(), T::one(), T::zero())
    }

    pub fn order(&self) -> usize {
        self.diag.len()
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    /// Coefficient coupling row `row` to row `row - 1` (zero for row 0).
    pub fn sub_at(&self, row: usize) -> T {
        if row == 0 {
            T::zero()
        } else {
            self.lower[row - 1].clone()
        }
    }

    /// Coefficient coupling row `row` to row `row + 1` (zero for the last row).
    pub fn super_at(&self, row: usize) -> T {
        if row + 1 >= self.order() {
            T::zero()
        } else {
            self.upper[row].clone()
        }
    }

    /// Rows and columns `first..=last`; couplings across the cut are dropped.
    pub fn submatrix(&self, first: usize, last: usize) -> Result<Self, TridiagError> {
        let n = self.order();
        if first > last || last >= n {
            return Err(TridiagError::IndexOutOfRange { first, last, n });
        }
        Ok(Self {
            lower: self.lower[first..last].to_vec(),
            diag: self.diag[first..=last].to_vec(),
            upper: self.upper[first..last].to_vec(),
        })
    }

    pub fn transpose(&self) -> Self {
        Self {
            lower: self.upper.clone(),
            diag: self.diag.clone(),
            upper: self.lower.clone(),
        }
    }

    /// `|b_i| >= |a_i| + |c_i|` for every row, strictly for at least one.
    pub fn is_diagonally_dominant(&self) -> bool {
        let mut strict = false;
        for i in 0..self.order() {
            let off = self.sub_at(i).magnitude() + self.super_at(i).magnitude();
            let d = self.diag[i].magnitude();
            if d < off {
                return false;
            }
            if d > off {
                strict = true;
            }
        }
        strict
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[T]) -> Result<Vec<T>, TridiagError> {
        let n = self.order();
        check_len(n, x.len())?;
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let mut v = self.diag[i].clone() * x[i].clone();
            if i > 0 {
                v = v + self.lower[i - 1].clone() * x[i - 1].clone();
            }
            if i + 1 < n {
                v = v + self.upper[i].clone() * x[i + 1].clone();
            }
            y.push(v);
        }
        Ok(y)
    }

    /// Dense row-major copy, mostly for tests and small diagnostics.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let n = self.order();
        let mut m = vec![vec![T::zero(); n]; n];
        for i in 0..n {
            m[i][i] = self.diag[i].clone();
            if i + 1 < n {
                m[i][i + 1] = self.upper[i].clone();
                m[i + 1][i] = self.lower[i].clone();
            }
        }
        m
    }

    /// Crout factorization `A = L U` without pivoting.
    pub fn factorize(&self) -> Result<ThomasFactorization<T>, TridiagError> {
        ThomasFactorization::new(self)
    }
}

fn check_len(expected: usize, found: usize) -> Result<(), TridiagError> {
    if expected != found {
        Err(TridiagError::DimensionMismatch { expected, found })
    } else {
        Ok(())
    }
}

/// Cached Thomas factorization `A = L U`, with `L` lower bidiagonal
/// (diagonal `pivots`, sub-diagonal equal to the matrix sub-diagonal) and
/// `U` unit upper bidiagonal (super-diagonal `ratios`).
///
/// Solving through the cached factors performs exactly the same floating
/// point operations as [`thomas_solve`], so results are bit-identical.
#[derive(Debug, Clone, PartialEq)]
pub struct ThomasFactorization<T> {
    pivots: Vec<T>,
    ratios: Vec<T>,
    lower: Vec<T>,
}

impl<T: Scalar> ThomasFactorization<T> {
    fn new(a: &TridiagonalMatrix<T>) -> Result<Self, TridiagError> {
        let n = a.order();
        let floor = T::pivot_floor();
        let mut pivots = Vec::with_capacity(n);
        let mut ratios: Vec<T> = Vec::with_capacity(n.saturating_sub(1));
        for i in 0..n {
            let d = if i == 0 {
                a.diag[0].clone()
            } else {
                a.diag[i].clone() - a.lower[i - 1].clone() * ratios[i - 1].clone()
            };
            if d.is_negligible(&floor) {
                return Err(TridiagError::ZeroPivot { row: i });
            }
            if i + 1 < n {
                ratios.push(a.upper[i].clone() / d.clone());
            }
            pivots.push(d);
        }
        Ok(Self {
            pivots,
            ratios,
            lower: a.lower.clone(),
        })
    }

    pub fn order(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivots(&self) -> &[T] {
        &self.pivots
    }

    /// Solves `A x = f` in place.
    pub fn solve_in_place(&self, f: &mut [T]) -> Result<(), TridiagError> {
        check_len(self.order(), f.len())?;
        self.solve_leading_in_place(f);
        Ok(())
    }

    pub fn solve(&self, f: &[T]) -> Result<Vec<T>, TridiagError> {
        let mut x = f.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    /// Solves the leading principal block of order `f.len()` (rows and
    /// columns `0..f.len()`). Crout elimination runs top-down, so the leading
    /// factors of `A` are exactly the factors of that block.
    pub fn solve_leading_in_place(&self, f: &mut [T]) {
        let k = f.len();
        debug_assert!(k <= self.order());
        if k == 0 {
            return;
        }
        f[0] = f[0].clone() / self.pivots[0].clone();
        for i in 1..k {
            let g = f[i].clone() - self.lower[i - 1].clone() * f[i - 1].clone();
            f[i] = g / self.pivots[i].clone();
        }
        for i in (0..k - 1).rev() {
            f[i] = f[i].clone() - self.ratios[i].clone() * f[i + 1].clone();
        }
    }

    /// Solves `Aᵀ x = f` with the factors of `A` (`Aᵀ = Uᵀ Lᵀ`).
    pub fn solve_transpose(&self, f: &[T]) -> Result<Vec<T>, TridiagError> {
        let n = self.order();
        check_len(n, f.len())?;
        let mut y = f.to_vec();
        for i in 1..n {
            y[i] = y[i].clone() - self.ratios[i - 1].clone() * y[i - 1].clone();
        }
        y[n - 1] = y[n - 1].clone() / self.pivots[n - 1].clone();
        for i in (0..n - 1).rev() {
            let v = y[i].clone() - self.lower[i].clone() * y[i + 1].clone();
            y[i] = v / self.pivots[i].clone();
        }
        Ok(y)
    }
}

/// Solves `A x = f` by forward elimination and back substitution.
///
/// No pivoting is done; `A` is expected to be diagonally dominant.
pub fn thomas_solve<T: Scalar>(a: &TridiagonalMatrix<T>, f: &[T]) -> Result<Vec<T>, TridiagError> {
    check_len(a.order(), f.len())?;
    a.factorize()?.solve(f)
}

/// `‖A x − f‖₂ / ‖f‖₂`.
pub fn residual_relnorm<T: Real>(a: &TridiagonalMatrix<T>, x: &[T], f: &[T]) -> Result<T, TridiagError> {
    check_len(a.order(), f.len())?;
    let ax = a.apply(x)?;
    let fnorm = norm2(f);
    if fnorm == T::zero() {
        return Err(TridiagError::ZeroRhs);
    }
    let r: Vec<T> = ax.iter().zip(f).map(|(&u, &v)| u - v).collect();
    Ok(norm2(&r) / fnorm)
}

pub(crate) fn norm2<T: Real>(v: &[T]) -> T {
    // scaled accumulation keeps this safe for very large or tiny entries
    let scale = v.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    if scale == T::zero() {
        return T::zero();
    }
    let s = v.iter().fold(T::zero(), |acc, &x| {
        let y = x / scale;
        acc + y * y
    });
    scale * s.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::FromPrimitive;
    use rand::{Rng, SeedableRng};

    fn laplace(n: usize) -> TridiagonalMatrix<f64> {
        TridiagonalMatrix::constant(n, -1.0, 2.0, -1.0).unwrap()
    }

    fn dense_solve(m: &[Vec<f64>], f: &[f64]) -> Vec<f64> {
        let n = f.len();
        let mut a: Vec<Vec<f64>> = m.to_vec();
        let mut b = f.to_vec();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for i in k + 1..n {
                let l = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= l * a[k][j];
                }
                b[i] -= l * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
            x[i] = (b[i] - s) / a[i][i];
        }
        x
    }

    fn random_dominant(n: usize, rng: &mut impl Rng) -> TridiagonalMatrix<f64> {
        let lower: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let upper: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let diag = (0..n)
            .map(|i| {
                let off = if i > 0 { lower[i - 1].abs() } else { 0.0 } + if i + 1 < n { upper[i].abs() } else { 0.0 };
                let s = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                s * (off + rng.gen_range(0.01..1.0))
            })
            .collect();
        TridiagonalMatrix::new(lower, diag, upper).unwrap()
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let a = TridiagonalMatrix::<f64>::identity(3).unwrap();
        assert_eq!(thomas_solve(&a, &[3.0, -1.0, 7.0]).unwrap(), vec![3.0, -1.0, 7.0]);
    }

    #[test]
    fn laplace_three_by_three() {
        let x = thomas_solve(&laplace(3), &[1.0, 0.0, 0.0]).unwrap();
        for (u, v) in x.iter().zip([0.75, 0.5, 0.25]) {
            assert!((u - v).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_rational_solve() {
        let q = |x: i64| BigRational::from_i64(x).unwrap();
        let a = TridiagonalMatrix::constant(3, q(-1), q(2), q(-1)).unwrap();
        let x = thomas_solve(&a, &[q(1), q(0), q(0)]).unwrap();
        assert_eq!(x, vec![q(3) / q(4), q(1) / q(2), q(1) / q(4)]);
    }

    #[test]
    fn mode_system_matches_dense_solve() {
        // one spectral mode: second-difference stencil along a line with
        // a constant shift from the transverse eigenvalue
        let (n2, l) = (4usize, 2usize);
        let lambda = 4.0 * (std::f64::consts::PI * (l - 1) as f64 / (2.0 * n2 as f64)).sin().powi(2);
        let n = 9;
        let mut a = TridiagonalMatrix::constant(n, -1.0, 2.0 + lambda, -1.0).unwrap();
        a.diag[0] = 1.0 + lambda;
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = thomas_solve(&a, &f).unwrap();
        let y = dense_solve(&a.to_dense(), &f);
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn random_dominant_agrees_with_dense() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for n in [1usize, 2, 3, 17, 200] {
            let a = random_dominant(n, &mut rng);
            assert!(a.is_diagonally_dominant());
            let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x = thomas_solve(&a, &f).unwrap();
            let y = dense_solve(&a.to_dense(), &f);
            let err = x.iter().zip(&y).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
            let scale = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
            assert!(err <= 1e-10 * scale.max(1.0), "n={n} err={err}");
            let res = a.apply(&x).unwrap();
            let rmax = res.iter().zip(&f).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
            let fmax = f.iter().map(|v| v.abs()).fold(0.0, f64::max);
            assert!(rmax / (fmax + 1.0) <= 100.0 * f64::EPSILON * n as f64);
        }
    }

    #[test]
    fn transpose_solve_matches_transposed_matrix() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let a = random_dominant(12, &mut rng);
        let f: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = a.factorize().unwrap().solve_transpose(&f).unwrap();
        let r = a.transpose().apply(&x).unwrap();
        for (u, v) in r.iter().zip(&f) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn leading_block_solve_matches_submatrix() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(9);
        let a = random_dominant(10, &mut rng);
        let fac = a.factorize().unwrap();
        let mut f: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let expect = thomas_solve(&a.submatrix(0, 5).unwrap(), &f).unwrap();
        fac.solve_leading_in_place(&mut f);
        assert_eq!(f, expect);
    }

    #[test]
    fn zero_pivot_is_reported() {
        let a = TridiagonalMatrix::new(vec![1.0], vec![0.0, 1.0], vec![1.0]).unwrap();
        assert_eq!(thomas_solve(&a, &[1.0, 1.0]), Err(TridiagError::ZeroPivot { row: 0 }));
        let tiny = TridiagonalMatrix::new(vec![], vec![1e-301], vec![]).unwrap();
        assert!(matches!(thomas_solve(&tiny, &[1.0]), Err(TridiagError::ZeroPivot { .. })));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = laplace(3);
        assert!(matches!(
            thomas_solve(&a, &[1.0, 2.0]),
            Err(TridiagError::DimensionMismatch { expected: 3, found: 2 })
        ));
        assert!(TridiagonalMatrix::new(vec![1.0], vec![1.0, 2.0, 3.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn submatrix_cases() {
        let a = laplace(5);
        assert_eq!(a.submatrix(0, 4).unwrap(), a);
        assert_eq!(a.submatrix(1, 3).unwrap(), laplace(3));
        let b = TridiagonalMatrix::new(vec![10.0, 20.0, 30.0, 40.0], vec![1.0, 2.0, 3.0, 4.0, 5.0], vec![-1.0, -2.0, -3.0, -4.0]).unwrap();
        let s = b.submatrix(2, 2).unwrap();
        assert_eq!(s.order(), 1);
        assert_eq!(s.diag(), &[3.0]);
        assert!(matches!(b.submatrix(3, 5), Err(TridiagError::IndexOutOfRange { .. })));
        assert!(matches!(b.submatrix(3, 2), Err(TridiagError::IndexOutOfRange { .. })));
    }

    #[test]
    fn residual_relnorm_cases() {
        let a = laplace(6);
        let f = vec![1.0, -2.0, 0.5, 0.0, 3.0, 1.0];
        let x = thomas_solve(&a, &f).unwrap();
        assert!(residual_relnorm(&a, &x, &f).unwrap() <= 1e-12);
        assert_eq!(residual_relnorm(&a, &[0.0; 6], &f).unwrap(), 1.0);
        assert_eq!(residual_relnorm(&a, &x, &[0.0; 6]), Err(TridiagError::ZeroRhs));
    }

    #[test]
    fn residual_grows_linearly_along_a_direction() {
        // slope along a fixed direction d is ‖A d‖ / ‖f‖; along the top
        // eigenvector this is ‖A‖₂ / ‖f‖₂
        let n = 8;
        let a = laplace(n);
        let f: Vec<f64> = (0..n).map(|i| (i as f64 + 1.0).sin()).collect();
        let x = thomas_solve(&a, &f).unwrap();
        let theta = std::f64::consts::PI * n as f64 / (n as f64 + 1.0);
        let d: Vec<f64> = (0..n).map(|i| (theta * (i as f64 + 1.0)).sin()).collect();
        let dn = norm2(&d);
        let d: Vec<f64> = d.iter().map(|v| v / dn).collect();
        let norm_a = 2.0 - 2.0 * theta.cos();
        for eps in [1e-6, 1e-4, 1e-2] {
            let xp: Vec<f64> = x.iter().zip(&d).map(|(u, v)| u + eps * v).collect();
            let slope = residual_relnorm(&a, &xp, &f).unwrap() / eps;
            assert!((slope - norm_a / norm2(&f)).abs() < 1e-6 * slope.max(1.0));
        }
    }

    #[test]
    fn dominance_check() {
        assert!(laplace(4).is_diagonally_dominant());
        let weak = TridiagonalMatrix::constant(4, -1.0, 1.5, -1.0).unwrap();
        assert!(!weak.is_diagonally_dominant());
        // equality everywhere is not enough
        let periodic_like = TridiagonalMatrix::new(vec![-1.0], vec![1.0, 1.0], vec![-1.0]).unwrap();
        assert!(!periodic_like.is_diagonally_dominant());
    }
}
