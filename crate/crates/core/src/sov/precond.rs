use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use num_complex::Complex;

use super::{DctPlan, SovError};
use crate::comm::{CommStats, Executor};
use crate::dichotomy::{solve_systems, DichotomyPlan, Partition};
use crate::fd::{DiscreteOperator, Grid2D};
use crate::scalar::{from_usize, lit, Real};
use crate::tridiag::{ThomasFactorization, TridiagonalMatrix};

/// How `Ṽ` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VtildeMode<T> {
    /// `(min κ + max κ) / 2` over the sampled coefficient.
    Auto,
    Manual(T),
}

/// How the shift constant `c` in `d = r c` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShiftMode<T> {
    /// `c = h²/4 · (ρ⁻¹)~`, with `h` the Laguerre parameter and `(ρ⁻¹)~`
    /// the mid-range of `1/ρ`.
    Acoustic {
        h: T,
        rho_inv: T,
    },
    /// `c = (d1 + d2) / 2` from the sampled reaction coefficient.
    Average,
    Constant(T),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SovOptions {
    pub ranks: usize,
    pub executor: Executor,
    /// Build each mode's dichotomy plan when it is needed instead of
    /// keeping all of them.
    pub lazy_plans: bool,
}

impl Default for SovOptions {
    fn default() -> Self {
        Self {
            ranks: 1,
            executor: Executor::Sim,
            lazy_plans: false,
        }
    }
}

enum ModeSolver<T> {
    Thomas(Vec<ThomasFactorization<T>>),
    Plans(Vec<DichotomyPlan<T>>),
    Lazy(Partition),
}

/// `λ_l = 4 sin²(π l / (2 N2)) / h2²` for 0-based mode `l`.
pub fn mode_eigenvalue<T: Real>(l: usize, n2: usize, h2: T) -> T {
    let s = (T::PI() * from_usize::<T>(l) / from_usize::<T>(2 * n2)).sin();
    lit::<T>(4.0) * s * s / (h2 * h2)
}

pub struct SovPreconditioner<T> {
    b: DiscreteOperator<T>,
    vtilde: T,
    shift: T,
    modes: Vec<TridiagonalMatrix<T>>,
    solver: ModeSolver<T>,
    dct: DctPlan<T>,
    options: SovOptions,
    applications: AtomicU64,
    stats: Mutex<CommStats>,
}

impl<T: Real> std::fmt::Debug for SovPreconditioner<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SovPreconditioner")
            .field("grid", self.b.grid())
            .field("vtilde", &self.vtilde)
            .field("shift", &self.shift)
            .field("options", &self.options)
            .finish()
    }
}

impl<T: Real> SovPreconditioner<T> {
    /// Preconditioner with coefficient `vtilde` and shift `d = r shift`.
    pub fn new(grid: Grid2D<T>, vtilde: T, shift: T, options: SovOptions) -> Result<Self, SovError> {
        if !(vtilde > T::zero()) {
            return Err(SovError::Config(format!("Ṽ must be positive, got {vtilde}")));
        }
        if !(shift >= T::zero()) {
            return Err(SovError::Config(format!("shift must be non-negative, got {shift}")));
        }
        if options.ranks == 0 {
            return Err(SovError::Config("at least one rank is required".into()));
        }
        let zero = |_: T, _: T| T::zero();
        let b = DiscreteOperator::assemble(grid, &|_, _| vtilde, &|_, _| shift, &zero)?;
        let nr = grid.nr();
        let ih1 = T::one() / (grid.h1() * grid.h1());
        // the k = 0 line holds every radial coefficient
        let a1 = &b.a1()[..nr];
        let a2 = &b.a2()[..nr];
        let w = &b.w()[..nr];
        let modes = (0..grid.n2())
            .map(|l| {
                let lam = mode_eigenvalue(l, grid.n2(), grid.h2());
                let diag = (0..nr)
                    .map(|i| {
                        let inner = if i > 0 { a1[i - 1] } else { T::zero() };
                        (a1[i] + inner) * ih1 + a2[i] * lam + w[i]
                    })
                    .collect();
                let off: Vec<T> = (0..nr - 1).map(|i| -a1[i] * ih1).collect();
                TridiagonalMatrix::new(off.clone(), diag, off)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let solver = if options.ranks == 1 {
            ModeSolver::Thomas(modes.iter().map(|m| m.factorize()).collect::<Result<_, _>>()?)
        } else {
            let part = Partition::uniform(nr, options.ranks)?;
            if options.lazy_plans {
                ModeSolver::Lazy(part)
            } else {
                ModeSolver::Plans(modes.iter().map(|m| DichotomyPlan::build(m, part.clone())).collect::<Result<_, _>>()?)
            }
        };
        Ok(Self {
            b,
            vtilde,
            shift,
            modes,
            solver,
            dct: DctPlan::new(grid.n2()),
            options,
            applications: AtomicU64::new(0),
            stats: Mutex::new(CommStats::zeros(options.ranks)),
        })
    }

    /// Preconditioner for `op` with `Ṽ` and shift chosen by the given modes.
    pub fn for_operator(op: &DiscreteOperator<T>, vtilde: VtildeMode<T>, shift: ShiftMode<T>, options: SovOptions) -> Result<Self, SovError> {
        let bounds = op.bounds();
        let v = match vtilde {
            VtildeMode::Auto => (bounds.s1 + bounds.s2) / lit(2.0),
            VtildeMode::Manual(v) => v,
        };
        let c = match shift {
            ShiftMode::Acoustic { h, rho_inv } => h * h / lit(4.0) * rho_inv,
            ShiftMode::Average => (bounds.d1 + bounds.d2) / lit(2.0),
            ShiftMode::Constant(c) => c,
        };
        Self::new(*op.grid(), v, c, options)
    }

    pub fn grid(&self) -> &Grid2D<T> {
        self.b.grid()
    }

    pub fn vtilde(&self) -> T {
        self.vtilde
    }

    /// The shift constant `c` of `d = r c`.
    pub fn shift(&self) -> T {
        self.shift
    }

    pub fn options(&self) -> SovOptions {
        self.options
    }

    /// Radial system of cosine mode `l` (0-based).
    pub fn mode_matrix(&self, l: usize) -> &TridiagonalMatrix<T> {
        &self.modes[l]
    }

    /// `B` itself, assembled as a constant-coefficient scheme.
    pub fn operator(&self) -> &DiscreteOperator<T> {
        &self.b
    }

    /// Number of `B⁻¹` applications so far.
    pub fn applications(&self) -> u64 {
        self.applications.load(Ordering::Relaxed)
    }

    /// Communication accumulated by the mode solves.
    pub fn comm_stats(&self) -> CommStats {
        self.stats.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }

    /// `B y`.
    pub fn apply_b(&self, y: &[T]) -> Result<Vec<T>, SovError> {
        Ok(self.b.apply_spd(y)?)
    }

    /// `B⁻¹ f`.
    pub fn apply_binv(&self, f: &[T]) -> Result<Vec<T>, SovError> {
        let mut out = vec![T::zero(); f.len()];
        self.apply_binv_into(f, &mut out)?;
        Ok(out)
    }

    pub fn apply_binv_into(&self, f: &[T], out: &mut [T]) -> Result<(), SovError> {
        let g = self.grid();
        let (nr, n2) = (g.nr(), g.n2());
        let nu = g.unknowns();
        for len in [f.len(), out.len()] {
            if len != nu {
                return Err(SovError::DimensionMismatch { expected: nu, found: len });
            }
        }
        self.applications.fetch_add(1, Ordering::Relaxed);
        let mut col = vec![T::zero(); n2];
        let mut tcol = vec![T::zero(); n2];
        let mut work = vec![Complex::new(T::zero(), T::zero()); n2];
        // spectral coefficients, mode-major: row l holds all radial points
        let mut spec = vec![T::zero(); nu];
        for i in 0..nr {
            for k in 0..n2 {
                col[k] = f[k * nr + i];
            }
            self.dct.forward_with(&col, &mut tcol, &mut work);
            for l in 0..n2 {
                spec[l * nr + i] = tcol[l];
            }
        }
        match &self.solver {
            ModeSolver::Thomas(facs) => {
                for (l, fac) in facs.iter().enumerate() {
                    fac.solve_in_place(&mut spec[l * nr..(l + 1) * nr])?;
                }
            }
            ModeSolver::Plans(plans) => {
                let refs: Vec<&DichotomyPlan<T>> = plans.iter().collect();
                self.solve_distributed(&refs, &mut spec)?;
            }
            ModeSolver::Lazy(part) => {
                // one mode at a time keeps a single plan alive
                for l in 0..n2 {
                    let plan = DichotomyPlan::build(&self.modes[l], part.clone())?;
                    self.solve_distributed(&[&plan], &mut spec[l * nr..(l + 1) * nr])?;
                }
            }
        }
        for i in 0..nr {
            for l in 0..n2 {
                col[l] = spec[l * nr + i];
            }
            self.dct.inverse_with(&col, &mut tcol, &mut work);
            for k in 0..n2 {
                out[k * nr + i] = tcol[k];
            }
        }
        Ok(())
    }

    /// Solves consecutive radial rows of `spec`, one per plan, in one
    /// SPMD run.
    fn solve_distributed(&self, plans: &[&DichotomyPlan<T>], spec: &mut [T]) -> Result<(), SovError> {
        let nr = self.grid().nr();
        let rows: Vec<&[T]> = spec.chunks(nr).collect();
        let sol = solve_systems(self.options.executor, plans, &rows)?;
        for (dst, x) in spec.chunks_mut(nr).zip(sol.x) {
            dst.copy_from_slice(&x);
        }
        self.stats.lock().unwrap_or_else(|e| e.into_inner()).merge(&sol.stats);
        Ok(())
    }
}

/// Bounds `γ1 ≤ (Ay, y)/(By, y) ≤ γ2` for `A` assembled with `s1 ≤ κ ≤ s2`,
/// `d1 ≤ q ≤ d2`: `[min(s1/Ṽ, d1/c), max(s2/Ṽ, d2/c)]`, where the `q`
/// ratios are dropped when `c = 0`.
pub fn analytic_bounds<T: Real>(op: &DiscreteOperator<T>, b: &SovPreconditioner<T>) -> (T, T) {
    let bd = op.bounds();
    let v = b.vtilde();
    let c = b.shift();
    let (mut lo, mut hi) = (bd.s1 / v, bd.s2 / v);
    if c > T::zero() {
        lo = lo.min(bd.d1 / c);
        hi = hi.max(bd.d2 / c);
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::super::{dct_forward, dct_inverse};
    use super::*;
    use rand::{Rng, SeedableRng};

    fn direct_forward(x: &[f64]) -> Vec<f64> {
        let n = x.len() as f64;
        (0..x.len())
            .map(|l| {
                (2.0 / n).sqrt()
                    * x.iter()
                        .enumerate()
                        .map(|(k, v)| v * (std::f64::consts::PI * (k as f64 + 0.5) * l as f64 / n).cos())
                        .sum::<f64>()
            })
            .collect()
    }

    fn direct_inverse(y: &[f64]) -> Vec<f64> {
        let n = y.len() as f64;
        (0..y.len())
            .map(|k| {
                let tail: f64 = (1..y.len())
                    .map(|l| y[l] * (std::f64::consts::PI * (k as f64 + 0.5) * l as f64 / n).cos())
                    .sum();
                (2.0 / n).sqrt() * (0.5 * y[0] + tail)
            })
            .collect()
    }

    #[test]
    fn dct_matches_direct_sums() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(8);
        for n in [1usize, 2, 3, 4, 6, 16, 64, 100] {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a = dct_forward(&x);
            let b = direct_forward(&x);
            let c = dct_inverse(&x);
            let d = direct_inverse(&x);
            for i in 0..n {
                assert!((a[i] - b[i]).abs() < 1e-12, "n={n}");
                assert!((c[i] - d[i]).abs() < 1e-12, "n={n}");
            }
        }
    }

    #[test]
    fn dct_round_trip() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(9);
        for n in [4usize, 16, 256, 12] {
            let plan = DctPlan::new(n);
            for _ in 0..1000 {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let back = plan.inverse(&plan.forward(&x));
                let err = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(err <= 1e-12);
            }
        }
    }

    #[test]
    fn dct_of_constants_and_single_modes() {
        let n = 8;
        let c = dct_forward(&vec![2.5; n]);
        assert!((c[0] - 2.5 * (2.0 * n as f64).sqrt()).abs() < 1e-12);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-12));
        let x: Vec<f64> = (0..n).map(|k| (std::f64::consts::PI * (k as f64 + 0.5) * 3.0 / n as f64).cos()).collect();
        let y = dct_forward(&x);
        for (l, v) in y.iter().enumerate() {
            if l == 3 {
                assert!((v - (n as f64 / 2.0).sqrt()).abs() < 1e-12);
            } else {
                assert!(v.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mode_eigenvalues() {
        assert_eq!(mode_eigenvalue::<f64>(0, 1, 1.0), 0.0);
        assert_eq!(mode_eigenvalue::<f64>(0, 17, 0.3), 0.0);
        let h = 0.01;
        for n2 in [4usize, 64, 4096] {
            let lam = mode_eigenvalue(n2 - 1, n2, h);
            let expect = 4.0 * (std::f64::consts::PI * (n2 - 1) as f64 / (2.0 * n2 as f64)).sin().powi(2) / (h * h);
            assert!((lam - expect).abs() <= 1e-12 * expect);
            assert!(lam < 4.0 / (h * h));
        }
        assert!((mode_eigenvalue::<f64>(4095, 4096, 1.0) - 4.0).abs() < 1e-5);
    }

    #[test]
    fn mode_matrices_match_dense_assembly() {
        let g = Grid2D::new(9, 6, 2.0, 1.5).unwrap();
        let (v, c) = (1.7, 0.4);
        let b = SovPreconditioner::new(g, v, c, SovOptions::default()).unwrap();
        let (h1, h2) = (g.h1(), g.h2());
        for l in 0..6 {
            let lam = 4.0 * (std::f64::consts::PI * l as f64 / 12.0).sin().powi(2) / (h2 * h2);
            let dense = b.mode_matrix(l).to_dense();
            for i in 0..8 {
                let r = (i as f64 + 0.5) * h1;
                let rp = r + 0.5 * h1;
                let rm = if i == 0 { 0.0 } else { r - 0.5 * h1 };
                let d = v * (rp + rm) / (h1 * h1) + v * r * lam + r * c;
                assert!((dense[i][i] - d).abs() < 1e-12 * d);
                if i + 1 < 8 {
                    assert!((dense[i][i + 1] + v * rp / (h1 * h1)).abs() < 1e-12 * d);
                    assert!((dense[i + 1][i] + v * rp / (h1 * h1)).abs() < 1e-12 * d);
                }
            }
            assert!(b.mode_matrix(l).is_diagonally_dominant());
        }
    }

    fn random(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    fn relres(b: &SovPreconditioner<f64>, f: &[f64]) -> f64 {
        let y = b.apply_binv(f).unwrap();
        let by = b.apply_b(&y).unwrap();
        let num: f64 = by.iter().zip(f).map(|(a, b)| (a - b).powi(2)).sum();
        let den: f64 = f.iter().map(|a| a * a).sum();
        (num / den).sqrt()
    }

    #[test]
    fn inverse_is_exact_for_all_solvers() {
        for (n1, n2) in [(12, 12), (17, 10), (33, 32)] {
            let g = Grid2D::new(n1, n2, 1.0, 1.3).unwrap();
            let f = random(g.unknowns(), 1);
            for options in [
                SovOptions::default(),
                SovOptions {
                    ranks: 3,
                    ..SovOptions::default()
                },
                SovOptions {
                    ranks: 4,
                    executor: Executor::Threads,
                    lazy_plans: false,
                },
                SovOptions {
                    ranks: 2,
                    lazy_plans: true,
                    ..SovOptions::default()
                },
            ] {
                let b = SovPreconditioner::new(g, 1.3, 0.2, options).unwrap();
                assert!(relres(&b, &f) <= 1e-10);
            }
        }
    }

    #[test]
    fn inverse_of_image_and_zero() {
        let g = Grid2D::new(20, 16, 1.0, 1.0).unwrap();
        let b = SovPreconditioner::new(g, 2.0, 0.0, SovOptions::default()).unwrap();
        let x = random(g.unknowns(), 2);
        let y = b.apply_binv(&b.apply_b(&x).unwrap()).unwrap();
        assert!(x.iter().zip(&y).all(|(a, b)| (a - b).abs() < 1e-10));
        assert!(b.apply_binv(&vec![0.0; g.unknowns()]).unwrap().iter().all(|&v| v == 0.0));
        assert_eq!(b.applications(), 2);
    }

    #[test]
    fn distributed_modes_match_single_rank() {
        let g = Grid2D::new(30, 16, 1.0, 1.0).unwrap();
        let f = random(g.unknowns(), 3);
        let one = SovPreconditioner::new(g, 1.0, 0.5, SovOptions::default()).unwrap();
        let four = SovPreconditioner::new(
            g,
            1.0,
            0.5,
            SovOptions {
                ranks: 4,
                ..SovOptions::default()
            },
        )
        .unwrap();
        let a = one.apply_binv(&f).unwrap();
        let b = four.apply_binv(&f).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-11));
        let st = four.comm_stats();
        assert_eq!(st.levels(), 2);
        assert!(st.total_scalars() > 0);
    }

    #[test]
    fn inverse_is_self_adjoint() {
        let g = Grid2D::new(25, 20, 1.0, 2.0).unwrap();
        let b = SovPreconditioner::new(g, 1.0, 0.1, SovOptions::default()).unwrap();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        for s in 0..5 {
            let u = random(g.unknowns(), 10 + s);
            let v = random(g.unknowns(), 20 + s);
            let bu = b.apply_binv(&u).unwrap();
            let bv = b.apply_binv(&v).unwrap();
            let scale = dot(&bu, &bu).sqrt() * dot(&v, &v).sqrt();
            assert!((dot(&bu, &v) - dot(&u, &bv)).abs() <= 1e-11 * scale);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = Grid2D::new(8, 8, 1.0, 1.0).unwrap();
        assert!(SovPreconditioner::new(g, 0.0, 0.0, SovOptions::default()).is_err());
        assert!(SovPreconditioner::new(g, 1.0, -1.0, SovOptions::default()).is_err());
        // four ranks cannot each own two of seven radial unknowns
        assert!(SovPreconditioner::new(
            g,
            1.0,
            0.0,
            SovOptions {
                ranks: 4,
                ..SovOptions::default()
            }
        )
        .is_err());
    }
}
