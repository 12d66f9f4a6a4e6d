use std::fmt::Write;

use super::{half_log_rising, project_source, reconstruct_weights, LaguerreError, LaguerreParams, MediumModel, Wavelet};
use crate::comm::CommStats;
use crate::fd::{DiscreteOperator, Grid2D, ModelGrid};
use crate::iterative::{chebyshev_solve, estimate_bounds, pcg_solve, SolverKind, SolverOptions, SpectralBounds};
use crate::scalar::{lit, Real};
use crate::sov::{ShiftMode, SovOptions, SovPreconditioner, VtildeMode};

/// Running sums `S1 = Σ η_k Q_k`, `S2 = Σ k η_k Q_k` with
/// `η_k = √((k+α)!/k!)`, so that
/// `√(m!/(m+α)!) Σ_{k<m} (m−k) η_k Q_k = e^{−ℓ_m} (m S1 − S2)`,
/// `ℓ_m = ½ ln((m+α)!/m!)`.
#[derive(Debug, Clone)]
pub struct HarmonicSums<T> {
    alpha: u32,
    s1: Vec<T>,
    s2: Vec<T>,
    count: usize,
}

impl<T: Real> HarmonicSums<T> {
    pub fn new(n: usize, alpha: u32) -> Self {
        Self {
            alpha,
            s1: vec![T::zero(); n],
            s2: vec![T::zero(); n],
            count: 0,
        }
    }

    /// Number of harmonics pushed so far.
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Adds the next harmonic `Q_k`, `k = len()`.
    pub fn push(&mut self, q: &[T]) {
        let k = self.count;
        let eta = half_log_rising::<T>(k, self.alpha).exp();
        let keta = T::from(k).unwrap_or_else(T::zero) * eta;
        for ((a, b), &v) in self.s1.iter_mut().zip(&mut self.s2).zip(q) {
            *a = *a + eta * v;
            *b = *b + keta * v;
        }
        self.count += 1;
    }

    /// `√(m!/(m+α)!) Σ_{k<m} (m−k) η_k Q_k` at node `j`, for `m = len()`.
    pub fn convolution(&self, j: usize) -> T {
        let m = self.count;
        let c = (-half_log_rising::<T>(m, self.alpha)).exp();
        c * (T::from(m).unwrap_or_else(T::zero) * self.s1[j] - self.s2[j])
    }
}

/// Right-hand side `φ` of `(−Λ + w) Q_m = φ` for the next harmonic
/// `m = sums.len()`:
/// `φ_j = r_j [δ_j f_m − (h²/ρ_j²) (conv)_j]`, where the point source sits at
/// node `source` with weight `1/(2π r h1 h2)`.
pub fn harmonic_rhs<T: Real>(grid: &Grid2D<T>, source: (usize, usize), f_m: T, sums: &HarmonicSums<T>, h2_over_rho2: &[T]) -> Vec<T> {
    let nr = grid.nr();
    let mut phi = vec![T::zero(); grid.unknowns()];
    if !sums.is_empty() {
        for (j, p) in phi.iter_mut().enumerate() {
            let r = grid.r(j % nr);
            *p = -r * h2_over_rho2[j] * sums.convolution(j);
        }
    }
    let s = grid.index(source.0, source.1);
    phi[s] = phi[s] + f_m / (lit::<T>(2.0) * T::PI() * grid.h1() * grid.h2());
    phi
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcousticConfig {
    pub solver: SolverKind,
    pub options: SolverOptions,
    pub sov: SovOptions,
    /// Lanczos steps for the Chebyshev bounds.
    pub lanczos_steps: usize,
}

impl Default for AcousticConfig {
    fn default() -> Self {
        Self {
            solver: SolverKind::Pcg,
            options: SolverOptions::default(),
            sov: SovOptions::default(),
            lanczos_steps: 50,
        }
    }
}

/// Solved harmonics and the bookkeeping of the run.
#[derive(Debug, Clone)]
pub struct LaguerreSeries<T> {
    pub grid: Grid2D<T>,
    pub params: LaguerreParams<T>,
    pub harmonics: Vec<Vec<T>>,
    pub source_coeffs: Vec<T>,
    /// Total `B⁻¹` applications of the outer solves.
    pub m_delta: u64,
    pub iterations: Vec<usize>,
    pub operator_checksum: u64,
    pub bounds: Option<SpectralBounds>,
    pub comm: CommStats,
}

pub fn solve_all_harmonics<T: Real>(
    model: &MediumModel,
    grid: Grid2D<T>,
    params: LaguerreParams<T>,
    wavelet: &Wavelet<T>,
    source: (T, T),
    config: &AcousticConfig,
) -> Result<LaguerreSeries<T>, LaguerreError> {
    let h = params.h;
    let conv = |v: T| v.to_f64().unwrap_or(f64::NAN);
    let back = |v: f64| T::from(v).unwrap_or_else(T::zero);
    let kappa = |r: T, z: T| back(model.vs_at(conv(r), conv(z)));
    let q = |r: T, z: T| h * h / (lit::<T>(4.0) * back(model.rho_at(conv(r), conv(z)).powi(2)));
    let zero = |_: T, _: T| T::zero();
    let op = DiscreteOperator::assemble(grid, &kappa, &q, &zero)?;
    let inv_rho: Vec<f64> = model.rho.values.iter().map(|r| 1.0 / r).collect();
    let rho_inv = (inv_rho.iter().copied().fold(f64::INFINITY, f64::min) + inv_rho.iter().copied().fold(0.0, f64::max)) / 2.0;
    let precond = SovPreconditioner::for_operator(&op, VtildeMode::Auto, ShiftMode::Acoustic { h, rho_inv: back(rho_inv) }, config.sov)?;
    let bounds = match config.solver {
        SolverKind::Pcg => None,
        SolverKind::Chebyshev => Some(estimate_bounds(&op, &precond, config.lanczos_steps, 0x5eed)?),
    };
    let checksum = op.checksum();
    let fm = project_source(wavelet, &params)?;
    let src = grid.nearest(source.0, source.1);
    let h2_over_rho2: Vec<T> = (0..grid.unknowns())
        .map(|j| {
            let (i, k) = (j % grid.nr(), j / grid.nr());
            h * h / back(model.rho_at(conv(grid.r(i)), conv(grid.z(k))).powi(2))
        })
        .collect();
    let mut sums = HarmonicSums::new(grid.unknowns(), params.alpha);
    let mut harmonics = Vec::with_capacity(params.n_terms);
    let mut iterations = Vec::with_capacity(params.n_terms);
    let mut m_delta = 0;
    for (m, &f_m) in fm.iter().enumerate() {
        let phi = harmonic_rhs(&grid, src, f_m, &sums, &h2_over_rho2);
        let solved = match bounds {
            None => pcg_solve(&op, &precond, &phi, &config.options),
            Some(b) => chebyshev_solve(&op, &precond, &phi, b, &config.options),
        }
        .map_err(|source| LaguerreError::Harmonic { m, source })?;
        m_delta += solved.report.binv_applications;
        iterations.push(solved.report.iterations);
        sums.push(&solved.x);
        harmonics.push(solved.x);
    }
    if op.checksum() != checksum {
        return Err(LaguerreError::OperatorChanged);
    }
    Ok(LaguerreSeries {
        grid,
        params,
        harmonics,
        source_coeffs: fm,
        m_delta,
        iterations,
        operator_checksum: checksum,
        bounds,
        comm: precond.comm_stats(),
    })
}

impl<T: Real> LaguerreSeries<T> {
    /// `u(x_j, t) = (ht)^{α/2} Σ Q_m(x_j) l^α_m(ht)` for every unknown index
    /// in `nodes` and every time.
    pub fn reconstruct(&self, nodes: &[usize], times: &[T]) -> Result<Vec<Vec<T>>, LaguerreError> {
        times
            .iter()
            .map(|&t| {
                let w = reconstruct_weights(self.harmonics.len(), &self.params, t)?;
                Ok(nodes
                    .iter()
                    .map(|&j| self.harmonics.iter().zip(&w).fold(T::zero(), |s, (q, w)| s + q[j] * *w))
                    .collect())
            })
            .collect()
    }

    /// The whole field at time `t`.
    pub fn snapshot(&self, t: T) -> Result<Vec<T>, LaguerreError> {
        let w = reconstruct_weights(self.harmonics.len(), &self.params, t)?;
        let mut u = vec![T::zero(); self.grid.unknowns()];
        for (q, &wm) in self.harmonics.iter().zip(&w) {
            for (a, &b) in u.iter_mut().zip(q) {
                *a = *a + wm * b;
            }
        }
        Ok(u)
    }

    /// Snapshot as a node grid including the zero Dirichlet column.
    pub fn snapshot_model(&self, t: T) -> Result<ModelGrid, LaguerreError> {
        let u = self.snapshot(t)?;
        let g = &self.grid;
        let (n1, nr) = (g.n1(), g.nr());
        let values = (0..g.n2() * n1)
            .map(|j| {
                let (i, k) = (j % n1, j / n1);
                if i < nr {
                    u[g.index(i, k)].to_f64().unwrap_or(f64::NAN)
                } else {
                    0.0
                }
            })
            .collect();
        let to = |v: T| v.to_f64().unwrap_or(f64::NAN);
        Ok(ModelGrid::new(n1, g.n2(), to(g.l1()), to(g.l2()), values)?)
    }

    /// `‖Q_m‖²` (discrete `L2`) per harmonic.
    pub fn partial_energies(&self) -> Vec<T> {
        self.harmonics
            .iter()
            .map(|q| {
                let n = self.grid.l2_norm(q);
                n * n
            })
            .collect()
    }

    /// Share of the energy in the last 5% of harmonics; large values mean
    /// the series is cut too early.
    pub fn tail_energy_ratio(&self) -> T {
        let e = self.partial_energies();
        let total = e.iter().fold(T::zero(), |s, &v| s + v);
        if total == T::zero() {
            return T::zero();
        }
        let tail = e.len().div_ceil(20);
        e[e.len() - tail..].iter().fold(T::zero(), |s, &v| s + v) / total
    }

    /// Seismogram CSV: header `t,u(x1),u(x2),…`, one row per time.
    pub fn seismogram_csv(&self, receivers: &[(T, T)], times: &[T]) -> Result<String, LaguerreError> {
        let nodes: Vec<usize> = receivers
            .iter()
            .map(|&(r, z)| {
                let (i, k) = self.grid.nearest(r, z);
                self.grid.index(i, k)
            })
            .collect();
        let rows = self.reconstruct(&nodes, times)?;
        let mut s = String::from("t");
        for n in 1..=receivers.len() {
            let _ = write!(s, ",u(x{n})");
        }
        s.push('\n');
        for (t, row) in times.iter().zip(rows) {
            let _ = write!(s, "{:.6}", t.to_f64().unwrap_or(f64::NAN));
            for v in row {
                let _ = write!(s, ",{:e}", v.to_f64().unwrap_or(f64::NAN));
            }
            s.push('\n');
        }
        Ok(s)
    }
}
