//! The cosine pair used to diagonalise the `z` operator.
//!
//! Forward: `F_l = √(2/N) Σ_k f_k cos(π (k + ½) l / N)`.
//! Inverse: `y_k = √(2/N) (½ Y_0 + Σ_{l ≥ 1} Y_l cos(π (k + ½) l / N))`.
//!
//! All indices are 0-based. Powers of two go through one complex FFT of
//! length `N` (Makhoul's even/odd reordering); other lengths use direct
//! summation with a cached cosine table.

use num_complex::Complex;

use super::fft::FftPlan;
use crate::scalar::{from_usize, lit, Real};

#[derive(Debug, Clone)]
enum Kernel<T> {
    Fast { fft: FftPlan<T>, twiddle: Vec<Complex<T>> },
    Direct { table: Vec<T> },
}

/// Reusable transform of one length.
#[derive(Debug, Clone)]
pub struct DctPlan<T> {
    n: usize,
    kernel: Kernel<T>,
}

impl<T: Real> DctPlan<T> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "transform length must be positive");
        let nf = from_usize::<T>(n);
        let kernel = match FftPlan::new(n) {
            Some(fft) => {
                // e^{−iπl/(2N)}
                let twiddle = (0..n)
                    .map(|l| {
                        let a = -T::PI() * from_usize::<T>(l) / (nf + nf);
                        Complex::new(a.cos(), a.sin())
                    })
                    .collect();
                Kernel::Fast { fft, twiddle }
            }
            None => Kernel::Direct { table: cos_table(n) },
        };
        Self { n, kernel }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_fast(&self) -> bool {
        matches!(self.kernel, Kernel::Fast { .. })
    }

    fn scale(&self) -> T {
        (lit::<T>(2.0) / from_usize::<T>(self.n)).sqrt()
    }

    /// Forward transform of `x` into `out`; `work` must hold `N` values.
    pub fn forward_with(&self, x: &[T], out: &mut [T], work: &mut [Complex<T>]) {
        let n = self.n;
        assert!(x.len() == n && out.len() == n, "transform length");
        let s = self.scale();
        match &self.kernel {
            Kernel::Fast { fft, twiddle } => {
                let v = &mut work[..n];
                for j in 0..n / 2 {
                    v[j] = Complex::new(x[2 * j], T::zero());
                    v[n - 1 - j] = Complex::new(x[2 * j + 1], T::zero());
                }
                if n == 1 {
                    v[0] = Complex::new(x[0], T::zero());
                }
                fft.forward(v);
                for l in 0..n {
                    out[l] = s * (v[l] * twiddle[l]).re;
                }
            }
            Kernel::Direct { table } => {
                for l in 0..n {
                    let row = &table[l * n..(l + 1) * n];
                    out[l] = s * x.iter().zip(row).fold(T::zero(), |acc, (&a, &c)| acc + a * c);
                }
            }
        }
    }

    /// One-off inverse transform.of `y` into `out`; `work` must hold `N` values.
    pub fn inverse_with(&self, y: &[T], out: &mut [T], work: &mut [Complex<T>]) {
        let n = self.n;
        assert!(y.len() == n && out.len() == n, "transform length");
        match &self.kernel {
            Kernel::Fast { fft, twiddle } => {
                // out = √(N/2) · (inverse of the unnormalised DCT-II)
                let v = &mut work[..n];
                for l in 0..n {
                    let im = if l == 0 { T::zero() } else { -y[n - l] };
                    v[l] = Complex::new(y[l], im) * twiddle[l].conj();
                }
                fft.inverse(v);
                let s = (from_usize::<T>(n) / lit(2.0)).sqrt();
                for j in 0..n / 2 {
                    out[2 * j] = s * v[j].re;
                    out[2 * j + 1] = s * v[n - 1 - j].re;
                }
                if n == 1 {
                    out[0] = s * v[0].re;
                }
            }
            Kernel::Direct { table } => {
                let s = self.scale();
                let half = lit::<T>(0.5);
                for (k, o) in out.iter_mut().enumerate() {
                    let mut acc = half * y[0];
                    for l in 1..n {
                        acc = acc + y[l] * table[l * n + k];
                    }
                    *o = s * acc;
                }
            }
        }
    }

    pub fn forward(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.n];
        let mut work = vec![Complex::new(T::zero(), T::zero()); self.n];
        self.forward_with(x, &mut out, &mut work);
        out
    }

    pub fn inverse(&self, y: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.n];
        let mut work = vec![Complex::new(T::zero(), T::zero()); self.n];
        self.inverse_with(y, &mut out, &mut work);
        out
    }
}

/// `table[l N + k] = cos(π (k + ½) l / N)`.
fn cos_table<T: Real>(n: usize) -> Vec<T> {
    let nf = from_usize::<T>(n);
    let mut t = Vec::with_capacity(n * n);
    for l in 0..n {
        for k in 0..n {
            // reduce the angle argument exactly in integers first
            let m = ((2 * k + 1) * l) % (4 * n);
            t.push((T::PI() * from_usize::<T>(m) / (nf + nf)).cos());
        }
    }
    t
}

/// One-off forward transform.
pub fn dct_forward<T: Real>(x: &[T]) -> Vec<T> {
    DctPlan::new(x.len()).forward(x)
}

/// One-off inverse transform.
pub fn dct_inverse<T: Real>(y: &[T]) -> Vec<T> {
    DctPlan::new(y.len()).inverse(y)
}
