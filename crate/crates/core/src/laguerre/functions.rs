use super::{half_log_rising, LaguerreError};
use crate::scalar::{from_usize, lit, Real};

/// `g_m(τ) = e^{−τ/2} √(m!/(m+α)!) L^α_m(τ)` for `m < out.len()`.
///
/// The normalized three-term recurrence
/// `ψ_{m+1} = [(2m+α+1−τ) ψ_m − √(m(m+α)) ψ_{m−1}] / √((m+1)(m+α+1))`
/// runs from `ψ_0 = 1`; the prefactor `e^{−τ/2}/√α!` is carried as a log and
/// the iterates are rescaled whenever they grow past `1e150`.
pub fn weighted_laguerre_row<T: Real>(alpha: u32, tau: T, out: &mut [T]) -> Result<(), LaguerreError> {
    let n = out.len();
    if n == 0 {
        return Ok(());
    }
    let a = T::from(alpha).unwrap_or_else(T::zero);
    let mut log_scale = -tau / lit(2.0) - half_log_rising::<T>(0, alpha);
    let big = lit::<T>(1e150);
    let ln_big = big.ln();
    let mut prev = T::zero();
    let mut cur = T::one();
    for m in 0..n {
        if m == 1 {
            prev = cur;
            cur = (a + T::one() - tau) / (a + T::one()).sqrt();
        } else if m > 1 {
            let k = from_usize::<T>(m - 1);
            let next = ((lit::<T>(2.0) * k + a + T::one() - tau) * cur - (k * (k + a)).sqrt() * prev) / ((k + T::one()) * (k + a + T::one())).sqrt();
            prev = cur;
            cur = next;
        }
        if cur.abs() > big {
            cur = cur / big;
            prev = prev / big;
            log_scale = log_scale + ln_big;
        }
        let v = cur * log_scale.exp();
        if !v.is_finite() {
            return Err(LaguerreError::Overflow { m });
        }
        out[m] = v;
    }
    Ok(())
}

/// `l^α_m(τ) = √(h m!/(m+α)!) τ^{α/2} e^{−τ/2} L^α_m(τ)` for `m = 0..=m_max`.
pub fn laguerre_function_row<T: Real>(m_max: usize, alpha: u32, h: T, tau: T) -> Result<Vec<T>, LaguerreError> {
    let mut out = vec![T::zero(); m_max + 1];
    if tau == T::zero() {
        return Ok(out);
    }
    if !(tau > T::zero()) {
        return Err(LaguerreError::InvalidParams(format!("τ must be non-negative, got {tau}")));
    }
    weighted_laguerre_row(alpha, tau, &mut out)?;
    let pre = h.sqrt() * tau.powf(T::from(alpha).unwrap_or_else(T::zero) / lit(2.0));
    for v in &mut out {
        *v = *v * pre;
    }
    Ok(out)
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut x = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let nf = from_usize::<T>(n);
    for i in 0..n.div_ceil(2) {
        let mut z = (T::PI() * (from_usize::<T>(i) + lit(0.75)) / (nf + lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            // P_n(z) and P_n'(z) by the three-term recurrence
            let (mut p0, mut p1) = (T::one(), z);
            for k in 2..=n {
                let kf = from_usize::<T>(k);
                let p2 = ((lit::<T>(2.0) * kf - T::one()) * z * p1 - (kf - T::one()) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - T::one());
            let dz = p1 / dp;
            z = z - dz;
            if dz.abs() <= T::epsilon() * lit(4.0) {
                break;
            }
        }
        let wi = lit::<T>(2.0) / ((T::one() - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `(ht)^{α/2} l^α_m(ht) = √h τ^α g_m(τ)` for `m < n`; all zero at `t = 0`.
pub(crate) fn reconstruct_weights<T: Real>(n: usize, params: &super::LaguerreParams<T>, t: T) -> Result<Vec<T>, LaguerreError> {
    let tau = params.h * t;
    let mut out = vec![T::zero(); n];
    if tau == T::zero() {
        return Ok(out);
    }
    if !(tau > T::zero()) {
        return Err(LaguerreError::InvalidParams(format!("time must be non-negative, got {t}")));
    }
    weighted_laguerre_row(params.alpha, tau, &mut out)?;
    let pre = params.h.sqrt() * tau.powi(params.alpha as i32);
    for v in &mut out {
        *v = *v * pre;
    }
    Ok(out)
}
