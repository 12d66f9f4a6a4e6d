//! Iterative radix-2 complex FFT.

use num_complex::Complex;

use crate::scalar::{from_usize, Real};

/// Precomputed bit reversal and twiddles for one power-of-two length.
#[derive(Debug, Clone)]
pub struct FftPlan<T> {
    n: usize,
    rev: Vec<usize>,
    twiddles: Vec<Complex<T>>,
}

impl<T: Real> FftPlan<T> {
    /// `None` unless `n` is a power of two.
    pub fn new(n: usize) -> Option<Self> {
        if n == 0 || !n.is_power_of_two() {
            return None;
        }
        let bits = n.trailing_zeros();
        let rev = (0..n).map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) }).collect();
        let two_pi = T::PI() + T::PI();
        let twiddles = (0..n / 2)
            .map(|k| {
                let a = -two_pi * from_usize::<T>(k) / from_usize::<T>(n);
                Complex::new(a.cos(), a.sin())
            })
            .collect();
        Some(Self { n, rev, twiddles })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In place `X_k = Σ x_j e^{−2πi jk/n}`.
    pub fn forward(&self, x: &mut [Complex<T>]) {
        assert_eq!(x.len(), self.n, "fft length");
        for i in 0..self.n {
            let j = self.rev[i];
            if i < j {
                x.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= self.n {
            let half = len / 2;
            let step = self.n / len;
            for start in (0..self.n).step_by(len) {
                for j in 0..half {
                    let w = self.twiddles[j * step];
                    let u = x[start + j];
                    let v = x[start + j + half] * w;
                    x[start + j] = u + v;
                    x[start + j + half] = u - v;
                }
            }
            len *= 2;
        }
    }

    /// In place `x_j = (1/n) Σ X_k e^{2πi jk/n}`.
    pub fn inverse(&self, x: &mut [Complex<T>]) {
        for v in x.iter_mut() {
            *v = v.conj();
        }
        self.forward(x);
        let s = T::one() / from_usize::<T>(self.n);
        for v in x.iter_mut() {
            *v = v.conj() * s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn matches_direct_dft() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(4);
        for n in [1usize, 2, 8, 64] {
            let x: Vec<Complex<f64>> = (0..n).map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let mut y = x.clone();
            FftPlan::new(n).unwrap().forward(&mut y);
            for (k, yk) in y.iter().enumerate() {
                let mut s = Complex::new(0.0, 0.0);
                for (j, xj) in x.iter().enumerate() {
                    let a = -2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64;
                    s += xj * Complex::new(a.cos(), a.sin());
                }
                assert!((s - yk).norm() < 1e-12);
            }
            FftPlan::new(n).unwrap().inverse(&mut y);
            for (a, b) in x.iter().zip(&y) {
                assert!((a - b).norm() < 1e-14);
            }
        }
        assert!(FftPlan::<f64>::new(12).is_none());
    }
}
