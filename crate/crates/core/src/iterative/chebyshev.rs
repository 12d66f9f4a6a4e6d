use super::{check_dims, Clock, IterError, IterationReport, IterationSample, LinearOperator, Solve, SolverOptions, SpectralBounds};
use crate::scalar::{lit, Real};
use crate::tridiag::norm2;

/// Three-layer Chebyshev iteration from `y0 = 0`:
///
/// ```text
/// ȳ = y_k + τ B⁻¹ (f − A y_k),   τ = 2 / (γ1 + γ2)
/// y_{k+1} = α_{k+1} ȳ + (1 − α_{k+1}) y_{k−1}
/// ```
///
/// with `α_1 = 1`, `α_2 = 1 / (1 − s²/2)`, `α_{k+1} = 1 / (1 − s² α_k / 4)`
/// and `s = (γ2 − γ1) / (γ2 + γ1)`. The residual norm is only formed every
/// `check_every` steps.
pub fn chebyshev_solve<T: Real>(
    a: &dyn LinearOperator<T>,
    binv: &dyn LinearOperator<T>,
    f: &[T],
    bounds: SpectralBounds,
    opts: &SolverOptions,
) -> Result<Solve<T>, IterError> {
    chebyshev_solve_with(a, binv, f, bounds, opts, &mut |_, _| {})
}

/// [`chebyshev_solve`] calling `observe(k, y_k)` after every step.
pub fn chebyshev_solve_with<T: Real>(
    a: &dyn LinearOperator<T>,
    binv: &dyn LinearOperator<T>,
    f: &[T],
    bounds: SpectralBounds,
    opts: &SolverOptions,
    observe: &mut dyn FnMut(usize, &[T]),
) -> Result<Solve<T>, IterError> {
    opts.validate()?;
    bounds.validate()?;
    let n = check_dims(a, binv, f)?;
    let clock = Clock::new(opts.clock);
    let mut report = IterationReport::default();
    let fnorm = norm2(f);
    report.inner_products += 1;
    let mut y = vec![T::zero(); n];
    if fnorm == T::zero() {
        report.converged = true;
        return Ok(Solve { x: y, report });
    }
    let g1 = T::from(bounds.gamma1).unwrap_or_else(T::zero);
    let g2 = T::from(bounds.gamma2).unwrap_or_else(T::zero);
    let tau = lit::<T>(2.0) / (g1 + g2);
    let s = (g2 - g1) / (g2 + g1);
    let s2 = s * s;
    let tol = T::from(opts.tol).unwrap_or_else(T::epsilon);
    let mut prev = vec![T::zero(); n];
    let mut r = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let mut alpha = T::one();
    let mut relres = T::one();
    for k in 0..opts.maxiter {
        // r = f − A y; at y0 = 0 this is f
        if k == 0 {
            r.copy_from_slice(f);
        } else {
            a.apply(&y, &mut w)?;
            for i in 0..n {
                r[i] = f[i] - w[i];
            }
            if k % opts.check_every == 0 {
                relres = norm2(&r) / fnorm;
                report.inner_products += 1;
                report.history.push(IterationSample {
                    iter: k,
                    relres: relres.to_f64().unwrap_or(f64::NAN),
                    seconds: clock.seconds(),
                });
                if relres <= tol {
                    report.converged = true;
                    break;
                }
            }
        }
        binv.apply(&r, &mut w)?;
        report.binv_applications += 1;
        alpha = match k {
            0 => T::one(),
            1 => T::one() / (T::one() - s2 / lit(2.0)),
            _ => T::one() / (T::one() - s2 * alpha / lit(4.0)),
        };
        for i in 0..n {
            let bar = y[i] + tau * w[i];
            let next = alpha * bar + (T::one() - alpha) * prev[i];
            prev[i] = y[i];
            y[i] = next;
        }
        report.iterations = k + 1;
        observe(k + 1, &y);
    }
    if !report.converged {
        // the last step may have landed inside the tolerance
        a.apply(&y, &mut w)?;
        for i in 0..n {
            r[i] = f[i] - w[i];
        }
        relres = norm2(&r) / fnorm;
        report.inner_products += 1;
        report.history.push(IterationSample {
            iter: report.iterations,
            relres: relres.to_f64().unwrap_or(f64::NAN),
            seconds: clock.seconds(),
        });
        report.converged = relres <= tol;
    }
    report.relres = relres.to_f64().unwrap_or(f64::NAN);
    if !report.converged {
        return Err(IterError::MaxIterExceeded {
            iterations: report.iterations,
            relres: report.relres,
        });
    }
    Ok(Solve { x: y, report })
}
