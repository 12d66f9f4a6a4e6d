use super::{check_dims, dot, Clock, IterError, IterationReport, IterationSample, LinearOperator, Solve, SolverOptions};
use crate::scalar::Real;
use crate::tridiag::norm2;

/// Preconditioned conjugate gradients from `x0 = 0`.
pub fn pcg_solve<T: Real>(a: &dyn LinearOperator<T>, binv: &dyn LinearOperator<T>, f: &[T], opts: &SolverOptions) -> Result<Solve<T>, IterError> {
    pcg_solve_with(a, binv, f, opts, &mut |_, _| {}, &mut |_, _| {})
}

/// [`pcg_solve`] with hooks: `observe(k, x_k)` after every step and
/// `coeffs(α_k, β_k)` with the recurrence coefficients (the latter feed the
/// Lanczos estimate).
pub fn pcg_solve_with<T: Real>(
    a: &dyn LinearOperator<T>,
    binv: &dyn LinearOperator<T>,
    f: &[T],
    opts: &SolverOptions,
    observe: &mut dyn FnMut(usize, &[T]),
    coeffs: &mut dyn FnMut(T, T),
) -> Result<Solve<T>, IterError> {
    opts.validate()?;
    let n = check_dims(a, binv, f)?;
    let clock = Clock::new(opts.clock);
    let mut report = IterationReport::default();
    let mut x = vec![T::zero(); n];
    let fnorm = norm2(f);
    report.inner_products += 1;
    if fnorm == T::zero() {
        report.converged = true;
        return Ok(Solve { x, report });
    }
    let mut r = f.to_vec();
    let mut z = vec![T::zero(); n];
    let mut q = vec![T::zero(); n];
    binv.apply(&r, &mut z)?;
    report.binv_applications += 1;
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    report.inner_products += 1;
    let tol = T::from(opts.tol).unwrap_or_else(T::epsilon);
    let mut relres = T::one();
    for k in 1..=opts.maxiter {
        a.apply(&p, &mut q)?;
        let pq = dot(&p, &q);
        report.inner_products += 1;
        if !(pq > T::zero()) || !(rz > T::zero()) {
            return Err(IterError::Breakdown { iteration: k });
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] = x[i] + alpha * p[i];
            r[i] = r[i] - alpha * q[i];
        }
        relres = norm2(&r) / fnorm;
        report.inner_products += 1;
        report.iterations = k;
        report.history.push(IterationSample {
            iter: k,
            relres: relres.to_f64().unwrap_or(f64::NAN),
            seconds: clock.seconds(),
        });
        observe(k, &x);
        if relres <= tol {
            coeffs(alpha, T::zero());
            report.converged = true;
            break;
        }
        binv.apply(&r, &mut z)?;
        report.binv_applications += 1;
        let rz_new = dot(&r, &z);
        report.inner_products += 1;
        let beta = rz_new / rz;
        coeffs(alpha, beta);
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    report.relres = relres.to_f64().unwrap_or(f64::NAN);
    if !report.converged {
        return Err(IterError::MaxIterExceeded {
            iterations: report.iterations,
            relres: report.relres,
        });
    }
    Ok(Solve { x, report })
}
