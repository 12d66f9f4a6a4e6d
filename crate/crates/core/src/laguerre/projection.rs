use super::{gauss_legendre, reconstruct_weights, weighted_laguerre_row, LaguerreError, LaguerreParams};
use crate::scalar::{from_usize, lit, Real};

/// `f(t) = exp[−(2π f0 (t − t0))² / γ²] sin(2π f0 (t − t0))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavelet<T> {
    pub f0: T,
    pub t0: T,
    pub gamma: T,
    /// Overall factor; zero gives the silent source.
    pub amplitude: T,
}

impl<T: Real> Wavelet<T> {
    pub fn new(f0: T, t0: T, gamma: T) -> Result<Self, LaguerreError> {
        if !(f0 > T::zero()) || !(gamma > T::zero()) {
            return Err(LaguerreError::InvalidParams(format!("wavelet needs f0 > 0 and γ > 0, got {f0}, {gamma}")));
        }
        Ok(Self {
            f0,
            t0,
            gamma,
            amplitude: T::one(),
        })
    }

    pub fn eval(&self, t: T) -> T {
        let s = lit::<T>(2.0) * T::PI() * self.f0 * (t - self.t0);
        self.amplitude * (-(s * s) / (self.gamma * self.gamma)).exp() * s.sin()
    }

    /// Interval outside of which the envelope is below `1e−14`.
    pub fn support(&self) -> (T, T) {
        let w = self.gamma * (lit::<T>(14.0) * lit::<T>(10.0).ln()).sqrt() / (lit::<T>(2.0) * T::PI() * self.f0);
        ((self.t0 - w).max(T::zero()), self.t0 + w)
    }
}

/// `f_m = ∫ f(t) (ht)^{−α/2} l^α_m(ht) dt` for the wavelet.
pub fn project_source<T: Real>(w: &Wavelet<T>, params: &LaguerreParams<T>) -> Result<Vec<T>, LaguerreError> {
    if w.amplitude == T::zero() {
        return Ok(vec![T::zero(); params.n_terms]);
    }
    project_signal(&|t| w.eval(t), w.support(), params)
}

const PANEL_NODES: usize = 16;
const MAX_PANELS: usize = 1 << 16;

/// `∫_a^b f(t) √h g_m(ht) dt` by composite 16-point Gauss–Legendre,
/// doubling the panel count until no coefficient moves by more than
/// `1e−10` of the largest.
pub fn project_signal<T: Real>(f: &dyn Fn(T) -> T, support: (T, T), params: &LaguerreParams<T>) -> Result<Vec<T>, LaguerreError> {
    let (a, b) = support;
    if !(b > a) {
        return Ok(vec![T::zero(); params.n_terms]);
    }
    let (x, wts) = gauss_legendre::<T>(PANEL_NODES);
    let mut panels = 32;
    let mut prev = panel_sum(f, a, b, panels, &x, &wts, params)?;
    while panels < MAX_PANELS {
        panels *= 2;
        let next = panel_sum(f, a, b, panels, &x, &wts, params)?;
        let scale = next.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let diff = next.iter().zip(&prev).fold(T::zero(), |m, (p, q)| m.max((*p - *q).abs()));
        if diff <= lit::<T>(1e-10) * scale || scale == T::zero() {
            return Ok(next);
        }
        prev = next;
    }
    Err(LaguerreError::QuadratureNotConverged { panels })
}

fn panel_sum<T: Real>(f: &dyn Fn(T) -> T, a: T, b: T, panels: usize, x: &[T], w: &[T], params: &LaguerreParams<T>) -> Result<Vec<T>, LaguerreError> {
    let n = params.n_terms;
    let mut acc = vec![T::zero(); n];
    let mut row = vec![T::zero(); n];
    let width = (b - a) / from_usize(panels);
    let half = width / lit(2.0);
    let root_h = params.h.sqrt();
    for p in 0..panels {
        let mid = a + width * (from_usize::<T>(p) + lit(0.5));
        for (xi, wi) in x.iter().zip(w) {
            let t = mid + half * *xi;
            let ft = f(t);
            if ft == T::zero() {
                continue;
            }
            weighted_laguerre_row(params.alpha, params.h * t, &mut row)?;
            let c = *wi * half * ft * root_h;
            for (s, g) in acc.iter_mut().zip(&row) {
                *s = *s + c * *g;
            }
        }
    }
    Ok(acc)
}

/// `(ht)^{α/2} Σ c_m l^α_m(ht)`.
pub fn reconstruct_signal<T: Real>(coeffs: &[T], params: &LaguerreParams<T>, t: T) -> Result<T, LaguerreError> {
    let w = reconstruct_weights(coeffs.len(), params, t)?;
    Ok(coeffs.iter().zip(&w).fold(T::zero(), |s, (c, w)| s + *c * *w))
}
