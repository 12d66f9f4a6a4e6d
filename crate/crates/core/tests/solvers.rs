use ellipsys::fd::{DiscreteOperator, Grid2D};
use ellipsys::iterative::{chebyshev_solve, estimate_bounds, pcg_solve, SolverOptions};
use ellipsys::sov::{analytic_bounds, ShiftMode, SovOptions, SovPreconditioner, VtildeMode};

fn smooth_problem(n: usize) -> DiscreteOperator<f64> {
    let g = Grid2D::new(n, n, 1.0, 1.0).unwrap();
    let pi = std::f64::consts::PI;
    let kappa = move |r: f64, z: f64| 1.5 + 0.5 * (pi * r).sin() * (pi * z).cos();
    let q = |r: f64, _z: f64| 1.0 + r;
    let f = move |r: f64, z: f64| (-(r * r + (z - 0.3).powi(2)) * 20.0).exp();
    DiscreteOperator::assemble(g, &kappa, &q, &f).unwrap()
}

fn pcg_count(n: usize) -> usize {
    let op = smooth_problem(n);
    let b = SovPreconditioner::for_operator(&op, VtildeMode::Auto, ShiftMode::Average, SovOptions::default()).unwrap();
    let s = pcg_solve(&op, &b, op.phi(), &SolverOptions::default()).unwrap();
    assert!(op.residual_relnorm(&s.x).unwrap() <= 1e-10);
    s.report.iterations
}

#[test]
fn pcg_iterations_do_not_grow_with_the_grid() {
    let (a, b) = (pcg_count(64), pcg_count(128));
    assert!(a.abs_diff(b) <= 2, "{a} vs {b}");
}

#[test]
fn chebyshev_is_close_to_pcg() {
    let op = smooth_problem(64);
    let b = SovPreconditioner::for_operator(&op, VtildeMode::Auto, ShiftMode::Average, SovOptions::default()).unwrap();
    let opts = SolverOptions::default();
    let cg = pcg_solve(&op, &b, op.phi(), &opts).unwrap().report.iterations;
    let bounds = estimate_bounds(&op, &b, 50, 3).unwrap();
    let ch = chebyshev_solve(&op, &b, op.phi(), bounds, &opts).unwrap();
    assert!(op.residual_relnorm(&ch.x).unwrap() <= 1e-10);
    let ratio = ch.report.iterations as f64 / cg as f64;
    assert!((0.7..=1.3).contains(&ratio), "chebyshev {} vs cg {cg}", ch.report.iterations);
}

#[test]
fn analytic_bounds_enclose_lanczos_estimate() {
    let op = smooth_problem(32);
    let b = SovPreconditioner::for_operator(&op, VtildeMode::Auto, ShiftMode::Average, SovOptions::default()).unwrap();
    let (lo, hi) = analytic_bounds(&op, &b);
    let est = estimate_bounds(&op, &b, 60, 5).unwrap();
    assert!(
        lo <= est.gamma1 / 0.95 * (1.0 + 1e-9) && est.gamma2 / 1.05 <= hi * (1.0 + 1e-9),
        "[{lo}, {hi}] vs {est:?}"
    );
}

#[test]
fn constant_coefficients_converge_at_once() {
    let g = Grid2D::new(40, 40, 1.0, 1.0).unwrap();
    let op = DiscreteOperator::assemble(g, &|_, _| 2.5, &|_, _| 0.7, &|r: f64, z: f64| r + z).unwrap();
    let b = SovPreconditioner::for_operator(&op, VtildeMode::Auto, ShiftMode::Average, SovOptions::default()).unwrap();
    let s = pcg_solve(&op, &b, op.phi(), &SolverOptions::default()).unwrap();
    assert!(s.report.iterations <= 2);
}
