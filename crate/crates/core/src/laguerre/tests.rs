use super::*;
use crate::fd::Grid2D;
use rand::{Rng, SeedableRng};

fn binom(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

fn fact(n: u64) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

// explicit sum L^α_m(τ) = Σ_j (−1)^j C(m+α, m−j) τ^j / j!
fn laguerre_poly(m: u64, alpha: u64, tau: f64) -> f64 {
    (0..=m)
        .map(|j| (-1f64).powi(j as i32) * binom(m + alpha, m - j) * tau.powi(j as i32) / fact(j))
        .sum()
}

#[test]
fn row_vanishes_at_zero() {
    let row = laguerre_function_row(40, 3, 2.0, 0.0).unwrap();
    assert!(row.iter().all(|&v| v == 0.0));
}

#[test]
fn first_function_in_closed_form() {
    let row = laguerre_function_row(0, 2, 1.0, 2.0).unwrap();
    let expect = (0.5f64).sqrt() * 2.0 * (-1.0f64).exp();
    assert!((row[0] - expect).abs() < 1e-15);
    assert!((row[0] - 0.5203).abs() < 1e-4);
}

#[test]
fn recurrence_matches_explicit_polynomials() {
    for alpha in [2u32, 5] {
        for tau in [0.3, 1.7, 6.0, 15.0] {
            let h = 3.0;
            let row = laguerre_function_row(12, alpha, h, tau).unwrap();
            for m in 0..=12u64 {
                let a = alpha as u64;
                let expect = (h * fact(m) / fact(m + a)).sqrt() * tau.powf(alpha as f64 / 2.0) * (-tau / 2.0).exp() * laguerre_poly(m, a, tau);
                assert!((row[m as usize] - expect).abs() < 1e-11 * (1.0 + expect.abs()), "α={alpha} τ={tau} m={m}");
            }
        }
    }
}

#[test]
fn functions_are_orthonormal() {
    // 50 panels of 40 nodes on [0, 500]
    let (x, w) = gauss_legendre::<f64>(40);
    let (panels, end) = (50, 500.0);
    let width = end / panels as f64;
    let mut gram = vec![vec![0.0; 51]; 51];
    for p in 0..panels {
        for (xi, wi) in x.iter().zip(&w) {
            let tau = width * (p as f64 + 0.5 + 0.5 * xi);
            let row = laguerre_function_row(50, 2, 1.0, tau).unwrap();
            for m in 0..=50 {
                for k in 0..=m {
                    gram[m][k] += 0.5 * width * wi * row[m] * row[k];
                }
            }
        }
    }
    for m in 0..=50 {
        for k in 0..=m {
            let expect = if m == k { 1.0 } else { 0.0 };
            assert!((gram[m][k] - expect).abs() <= 1e-8, "({m},{k}) {}", gram[m][k]);
        }
    }
}

#[test]
fn large_orders_stay_finite() {
    let row = laguerre_function_row::<f64>(10_000, 5, 1.0, 10_000.0).unwrap();
    assert!(row.iter().all(|v| v.is_finite()));
    let row = laguerre_function_row::<f64>(10_000, 5, 1.0, 1e-3).unwrap();
    assert!(row.iter().all(|v| v.is_finite()));
}

#[test]
fn gauss_legendre_is_exact_for_polynomials() {
    let (x, w) = gauss_legendre::<f64>(8);
    assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    let i14: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
    assert!((i14 - 2.0 / 15.0).abs() < 1e-14);
    assert!(x.windows(2).all(|p| p[0] < p[1]));
    let (x1, w1) = gauss_legendre::<f64>(1);
    assert_eq!((x1[0], w1[0]), (0.0, 2.0));
}

#[test]
fn projecting_a_basis_function_gives_a_unit_vector() {
    let params = LaguerreParams::new(4.0, 3, 12).unwrap();
    let j = 5;
    let g = |t: f64| laguerre_function_row(11, 3, 4.0, 4.0 * t).unwrap()[j] * (4.0 * t).powf(1.5);
    let fm = project_signal(&g, (0.0, 40.0), &params).unwrap();
    for (m, v) in fm.iter().enumerate() {
        let expect = if m == j { 1.0 } else { 0.0 };
        assert!((v - expect).abs() < 1e-9, "m={m} {v}");
    }
    let back = reconstruct_signal(&fm, &params, 0.7).unwrap();
    assert!((back - g(0.7)).abs() < 1e-9);
}

#[test]
fn silent_wavelet_projects_to_zero() {
    let mut w = Wavelet::new(30.0, 0.2, 4.0).unwrap();
    w.amplitude = 0.0;
    let fm = project_source(&w, &LaguerreParams::new(300.0, 5, 50).unwrap()).unwrap();
    assert!(fm.iter().all(|&v| v == 0.0));
    assert!(project_signal(&|_t: f64| 0.0, (0.0, 1.0), &LaguerreParams::new(1.0, 2, 5).unwrap())
        .unwrap()
        .iter()
        .all(|&v| v == 0.0));
}

#[test]
fn wavelet_round_trip() {
    let w = Wavelet::new(30.0, 0.2, 4.0).unwrap();
    let params = LaguerreParams::new(300.0, 5, 2000).unwrap();
    let fm = project_source(&w, &params).unwrap();
    for s in 0..=60 {
        let t = s as f64 * 0.01;
        let u = reconstruct_signal(&fm, &params, t).unwrap();
        assert!((u - w.eval(t)).abs() < 1e-6, "t={t}: {u} vs {}", w.eval(t));
    }
    assert_eq!(reconstruct_signal(&fm, &params, 0.0).unwrap(), 0.0);
}

#[test]
fn convolution_weight_in_closed_form() {
    // m = 2, α = 2: weight of Q_0 is √(2!/4!)·2·√(2!/0!)
    let mut sums = HarmonicSums::<f64>::new(1, 2);
    sums.push(&[1.0]);
    sums.push(&[0.0]);
    let expect = (2.0f64 / 24.0).sqrt() * 2.0 * 2.0f64.sqrt();
    assert!((sums.convolution(0) - expect).abs() < 1e-14);
    assert!((expect - 0.8165).abs() < 1e-4);
}

#[test]
fn running_sums_match_direct_summation() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(4);
    let alpha = 5u32;
    let n = 7;
    let mut sums = HarmonicSums::<f64>::new(n, alpha);
    let mut qs: Vec<Vec<f64>> = Vec::new();
    let lnf = |k: u64| (1..=k).map(|v| (v as f64).ln()).sum::<f64>();
    for m in 0..=64u64 {
        for j in 0..n {
            let direct: f64 = qs
                .iter()
                .enumerate()
                .map(|(k, q)| {
                    let k = k as u64;
                    let w = (0.5 * (lnf(m) - lnf(m + 5) + lnf(k + 5) - lnf(k))).exp();
                    (m - k) as f64 * w * q[j]
                })
                .sum();
            let fast = sums.convolution(j);
            assert!((fast - direct).abs() <= 1e-12 * (1.0 + direct.abs()) * (m as f64 + 1.0), "m={m}");
        }
        let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        sums.push(&q);
        qs.push(q);
    }
}

#[test]
fn first_harmonic_rhs_is_the_point_source() {
    let g = Grid2D::new(6, 5, 1.0, 1.0).unwrap();
    let sums = HarmonicSums::new(g.unknowns(), 3);
    let phi = harmonic_rhs(&g, (0, 2), 0.5, &sums, &vec![1.0; g.unknowns()]);
    let s = g.index(0, 2);
    assert!((phi[s] - 0.5 / (2.0 * std::f64::consts::PI * g.h1() * g.h2())).abs() < 1e-15);
    assert!(phi.iter().enumerate().all(|(j, &v)| j == s || v == 0.0));
}

fn tiny_run(amplitude: f64) -> LaguerreSeries<f64> {
    let g = Grid2D::new(24, 24, 1200.0, 1200.0).unwrap();
    let model = MediumModel::homogeneous(24, 24, 1200.0, 1200.0, 2000.0, 1.0).unwrap();
    let mut w = Wavelet::new(8.0, 0.3, 4.0).unwrap();
    w.amplitude = amplitude;
    let params = LaguerreParams::new(200.0, 5, 24).unwrap();
    solve_all_harmonics(&model, g, params, &w, (0.0, 600.0), &AcousticConfig::default()).unwrap()
}

#[test]
fn silent_source_gives_silent_field() {
    let s = tiny_run(0.0);
    assert!(s.harmonics.iter().flatten().all(|&v| v == 0.0));
    assert_eq!(s.m_delta, 0);
    assert_eq!(s.tail_energy_ratio(), 0.0);
}

#[test]
fn series_bookkeeping() {
    let s = tiny_run(1.0);
    assert_eq!(s.harmonics.len(), 24);
    assert_eq!(s.m_delta, s.iterations.iter().sum::<usize>() as u64);
    let u0 = s.snapshot(0.0).unwrap();
    assert!(u0.iter().all(|&v| v == 0.0));
    // a single-term series is the first basis function times Q_0
    let mut one = s.clone();
    one.harmonics.truncate(1);
    let t = 0.25;
    let u = one.snapshot(t).unwrap();
    let l0 = laguerre_function_row(0, 5, 200.0, 200.0 * t).unwrap()[0];
    let pre = (200.0 * t).powf(2.5);
    for (a, q) in u.iter().zip(&s.harmonics[0]) {
        assert!((a - pre * l0 * q).abs() <= 1e-12 * (1.0 + a.abs()));
    }
    let csv = s.seismogram_csv(&[(0.0, 600.0), (500.0, 600.0)], &[0.0, 0.1]).unwrap();
    assert!(csv.starts_with("t,u(x1),u(x2)\n0.000000,0e0,0e0\n"));
    let snap = s.snapshot_model(0.4).unwrap();
    assert_eq!((snap.n1, snap.n2), (24, 24));
    assert!((0..24).all(|k| snap.get(23, k) == 0.0));
}

#[test]
fn bad_parameters_are_rejected() {
    assert!(LaguerreParams::new(1.0, 1, 10).is_err());
    assert!(LaguerreParams::new(0.0, 2, 10).is_err());
    assert!(LaguerreParams::new(1.0, 2, 0).is_err());
    assert!(Wavelet::new(0.0, 0.1, 4.0).is_err());
    assert!(laguerre_function_row(3, 2, 1.0, -1.0).is_err());
}
