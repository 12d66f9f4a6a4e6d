use super::{pcg_solve_with, IterError, LinearOperator, SolverOptions};
use crate::scalar::Real;
use rand::{Rng, SeedableRng};

/// `γ1 ≤ γ2` enclosing the spectrum of `B⁻¹A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBounds {
    pub gamma1: f64,
    pub gamma2: f64,
}

impl SpectralBounds {
    pub fn new(gamma1: f64, gamma2: f64) -> Result<Self, IterError> {
        let b = Self { gamma1, gamma2 };
        b.validate()?;
        Ok(b)
    }

    pub(crate) fn validate(&self) -> Result<(), IterError> {
        if self.gamma1 > 0.0 && self.gamma1 <= self.gamma2 && self.gamma2.is_finite() {
            Ok(())
        } else {
            Err(IterError::InvalidBounds {
                lo: self.gamma1,
                hi: self.gamma2,
            })
        }
    }

    pub fn ratio(&self) -> f64 {
        self.gamma2 / self.gamma1
    }

    /// Asymptotic Chebyshev contraction per step, `(1 − √ξ)/(1 + √ξ)`
    /// with `ξ = γ1/γ2`.
    pub fn rate(&self) -> f64 {
        let s = (self.gamma1 / self.gamma2).sqrt();
        (1.0 - s) / (1.0 + s)
    }
}

/// Ritz bounds for `B⁻¹A` from up to `steps` Lanczos steps, widened to
/// `(0.95 θ_min, 1.05 θ_max)`.
///
/// The Lanczos tridiagonal comes from the coefficients of preconditioned
/// CG on a random right-hand side drawn from `seed`:
/// `T_jj = 1/α_j + β_{j−1}/α_{j−1}`, `T_{j,j+1} = √β_j / α_j`.
pub fn estimate_bounds<T: Real>(a: &dyn LinearOperator<T>, binv: &dyn LinearOperator<T>, steps: usize, seed: u64) -> Result<SpectralBounds, IterError> {
    let ritz = ritz_values(a, binv, steps, seed)?;
    let (lo, hi) = (ritz[0], ritz[ritz.len() - 1]);
    if !(lo > 0.0) {
        return Err(IterError::Breakdown { iteration: ritz.len() });
    }
    SpectralBounds::new(0.95 * lo, 1.05 * hi)
}

/// All Ritz values, ascending.
pub(crate) fn ritz_values<T: Real>(a: &dyn LinearOperator<T>, binv: &dyn LinearOperator<T>, steps: usize, seed: u64) -> Result<Vec<f64>, IterError> {
    let n = a.dim();
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let f: Vec<T> = (0..n).map(|_| T::from(rng.gen_range(-1.0..1.0)).unwrap_or_else(T::zero)).collect();
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    let opts = SolverOptions {
        tol: 1e-14,
        maxiter: steps.max(1),
        ..SolverOptions::default()
    };
    let run = pcg_solve_with(a, binv, &f, &opts, &mut |_, _| {}, &mut |al, be| {
        alphas.push(al.to_f64().unwrap_or(f64::NAN));
        betas.push(be.to_f64().unwrap_or(f64::NAN));
    });
    match run {
        Ok(_) | Err(IterError::MaxIterExceeded { .. }) => {}
        Err(e) => return Err(e),
    }
    if alphas.is_empty() {
        return Err(IterError::Breakdown { iteration: 0 });
    }
    let m = alphas.len();
    let mut diag = vec![0.0; m];
    let mut off = vec![0.0; m.saturating_sub(1)];
    for j in 0..m {
        diag[j] = 1.0 / alphas[j];
        if j > 0 {
            diag[j] += betas[j - 1] / alphas[j - 1];
            off[j - 1] = betas[j - 1].sqrt() / alphas[j - 1];
        }
    }
    Ok(tridiagonal_eigenvalues(&diag, &off))
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag`
/// and off-diagonal `off`, ascending, by Sturm-sequence bisection.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    if n == 0 {
        return Vec::new();
    }
    // Gershgorin interval
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let rad = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - rad);
        hi = hi.max(diag[i] + rad);
    }
    let span = (hi - lo).max(hi.abs()).max(f64::MIN_POSITIVE);
    lo -= 1e-12 * span;
    hi += 1e-12 * span;
    // number of eigenvalues below x
    let count = |x: f64| {
        let mut c = 0;
        let mut d = 1.0;
        for i in 0..n {
            let e2 = if i > 0 { off[i - 1] * off[i - 1] } else { 0.0 };
            d = diag[i] - x - if i > 0 { e2 / d } else { 0.0 };
            if d == 0.0 {
                d = -f64::EPSILON * span;
            }
            if d < 0.0 {
                c += 1;
            }
        }
        c
    };
    (0..n)
        .map(|k| {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if count(m) > k {
                    b = m;
                } else {
                    a = m;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}
