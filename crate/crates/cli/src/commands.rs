use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ellipsys::comm::{CommStats, Executor};
use ellipsys::dichotomy::{predict_time_cyclic, predict_time_dichotomy, DichotomyPlan, Partition};
use ellipsys::fd::{read_model, write_model_raw, DiscreteOperator, Grid2D, ModelGrid};
use ellipsys::iterative::{chebyshev_solve, estimate_bounds, pcg_solve, SolverKind, SolverOptions};
use ellipsys::laguerre::{solve_all_harmonics, AcousticConfig, FaultParams, LaguerreParams, MediumModel, Wavelet};
use ellipsys::sov::{ShiftMode, SovOptions, SovPreconditioner, VtildeMode};
use ellipsys::tridiag::{residual_relnorm, TridiagonalMatrix};
use rand::{Rng, SeedableRng};

use crate::config::{Command, RunConfig};
use crate::error::CliError;

type Field = Box<dyn Fn(f64, f64) -> f64 + Sync>;

pub fn run(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    write(out, "effective.conf", &cfg.effective())?;
    match cfg.command {
        Command::Poisson => poisson(cfg, out),
        Command::Elliptic => elliptic(cfg, out),
        Command::Acoustic => acoustic(cfg, out),
        Command::Bench => bench(cfg, out),
    }
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    let p = dir.join(name);
    fs::write(&p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
}

fn grid(cfg: &RunConfig) -> Result<Grid2D<f64>, CliError> {
    Ok(Grid2D::new(cfg.get("grid.n1")?, cfg.get("grid.n2")?, cfg.get("grid.l1")?, cfg.get("grid.l2")?)?)
}

fn executor(cfg: &RunConfig) -> Result<Executor, CliError> {
    cfg.get("parallel.executor")
}

fn sov_options(cfg: &RunConfig) -> Result<SovOptions, CliError> {
    Ok(SovOptions {
        ranks: cfg.get("parallel.ranks")?,
        executor: executor(cfg)?,
        lazy_plans: cfg.get("precond.lazy_plans")?,
    })
}

fn solver_options(cfg: &RunConfig) -> Result<SolverOptions, CliError> {
    Ok(SolverOptions {
        tol: cfg.get("solver.tol")?,
        maxiter: cfg.get("solver.maxiter")?,
        check_every: cfg.get("solver.check_every")?,
        clock: executor(cfg)? == Executor::Threads,
    })
}

/// A model grid file whose node layout must match `g`.
fn model_file(path: &str, g: &Grid2D<f64>) -> Result<ModelGrid, CliError> {
    let m = read_model(Path::new(path)).map_err(|e| match CliError::from(e) {
        CliError::Io(msg) => CliError::Io(format!("{path}: {msg}")),
        other => other,
    })?;
    if (m.n1, m.n2) != (g.n1(), g.n2()) {
        return Err(CliError::Config(format!(
            "model {path} is {}x{} but the grid is {}x{}",
            m.n1,
            m.n2,
            g.n1(),
            g.n2()
        )));
    }
    Ok(m)
}

/// A number, a built-in name, or a model file.
fn field(cfg: &RunConfig, key: &str, g: &Grid2D<f64>) -> Result<Field, CliError> {
    let v = cfg.raw(key);
    if let Ok(c) = v.parse::<f64>() {
        return Ok(Box::new(move |_, _| c));
    }
    let (l1, l2) = (g.l1(), g.l2());
    let pi = std::f64::consts::PI;
    match v {
        // contrast 2
        "smooth" => Ok(Box::new(move |r, z| 1.5 + 0.5 * (pi * r / l1).sin() * (pi * z / l2).cos())),
        "bump" => Ok(Box::new(move |r, z| {
            let s = 0.1 * l1.min(l2);
            (-(r * r + (z - 0.5 * l2).powi(2)) / (s * s)).exp()
        })),
        path => {
            let m = model_file(path, g)?;
            Ok(Box::new(move |r, z| m.sample(r, z)))
        }
    }
}

/// Unknowns as a node grid, zero on the Dirichlet column.
fn to_model(g: &Grid2D<f64>, u: &[f64]) -> Result<ModelGrid, CliError> {
    let n1 = g.n1();
    let values = (0..n1 * g.n2())
        .map(|j| {
            let (i, k) = (j % n1, j / n1);
            if i < g.nr() {
                u[g.index(i, k)]
            } else {
                0.0
            }
        })
        .collect();
    Ok(ModelGrid::new(n1, g.n2(), g.l1(), g.l2(), values)?)
}

fn save_grid(dir: &Path, name: &str, m: &ModelGrid, meta: &[(&str, String)]) -> Result<(), CliError> {
    Ok(write_model_raw(&dir.join(name), m, meta)?)
}

fn report(lines: &[(&str, String)]) -> String {
    lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

fn comm_lines(s: &CommStats) -> Vec<(&'static str, String)> {
    vec![
        ("comm.messages", s.total_msgs().to_string()),
        ("comm.scalars", s.total_scalars().to_string()),
        ("comm.reduces", s.total_reduces().to_string()),
        ("comm.levels", s.levels().to_string()),
    ]
}

fn poisson(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let g = grid(cfg)?;
    let (vt, shift): (f64, f64) = (cfg.get("poisson.vtilde")?, cfg.get("poisson.shift")?);
    let f = field(cfg, "model.source", &g)?;
    let op = DiscreteOperator::assemble(g, &|_, _| vt, &|_, _| shift, &*f)?;
    let b = SovPreconditioner::new(g, vt, shift, sov_options(cfg)?).map_err(|e| CliError::Config(e.to_string()))?;
    let y = b.apply_binv(op.phi()).map_err(CliError::solver)?;
    let relres = op.residual_relnorm(&y)?;
    save_grid(out, "solution.raw", &to_model(&g, &y)?, &[("command", "poisson".into())])?;
    let mut lines = vec![
        ("relres", format!("{relres:e}")),
        ("ranks", cfg.raw("parallel.ranks").to_string()),
        ("executor", cfg.raw("parallel.executor").to_string()),
    ];
    lines.extend(comm_lines(&b.comm_stats()));
    write(out, "report.txt", &report(&lines))?;
    write(out, "comm.csv", &b.comm_stats().to_csv())
}

fn preconditioner(cfg: &RunConfig, op: &DiscreteOperator<f64>) -> Result<SovPreconditioner<f64>, CliError> {
    let vt = match cfg.raw("precond.vtilde_mode") {
        "manual" => VtildeMode::Manual(cfg.get("precond.vtilde")?),
        _ => VtildeMode::Auto,
    };
    let shift = match cfg.raw("precond.shift_mode") {
        "acoustic" => ShiftMode::Acoustic {
            h: cfg.get("laguerre.h")?,
            rho_inv: cfg.get::<f64>("acoustic.rho").map(|r| 1.0 / r).unwrap_or(1.0),
        },
        _ => ShiftMode::Average,
    };
    SovPreconditioner::for_operator(op, vt, shift, sov_options(cfg)?).map_err(|e| CliError::Config(e.to_string()))
}

fn elliptic(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let g = grid(cfg)?;
    let kappa = field(cfg, "model.kappa", &g)?;
    let q = field(cfg, "model.q", &g)?;
    let f = field(cfg, "model.source", &g)?;
    let op = DiscreteOperator::assemble(g, &*kappa, &*q, &*f)?;
    let b = preconditioner(cfg, &op)?;
    let opts = solver_options(cfg)?;
    let kind: SolverKind = cfg.get("solver.kind")?;
    let solved = match kind {
        SolverKind::Pcg => pcg_solve(&op, &b, op.phi(), &opts),
        SolverKind::Chebyshev => {
            let bounds = estimate_bounds(&op, &b, cfg.get("solver.lanczos_steps")?, 0x5eed).map_err(CliError::solver)?;
            chebyshev_solve(&op, &b, op.phi(), bounds, &opts)
        }
    }
    .map_err(CliError::solver)?;
    let relres = op.residual_relnorm(&solved.x)?;
    save_grid(out, "solution.raw", &to_model(&g, &solved.x)?, &[("command", "elliptic".into())])?;
    write(out, "iterations.csv", &solved.report.to_csv())?;
    let mut lines = vec![
        ("solver", kind.to_string()),
        ("iterations", solved.report.iterations.to_string()),
        ("binv_applications", solved.report.binv_applications.to_string()),
        ("inner_products", solved.report.inner_products.to_string()),
        ("relres", format!("{relres:e}")),
        ("vtilde", format!("{:e}", b.vtilde())),
        ("shift", format!("{:e}", b.shift())),
    ];
    lines.extend(comm_lines(&b.comm_stats()));
    write(out, "report.txt", &report(&lines))?;
    write(out, "comm.csv", &b.comm_stats().to_csv())
}

fn medium(cfg: &RunConfig, g: &Grid2D<f64>) -> Result<MediumModel, CliError> {
    let (n1, n2, l1, l2) = (g.n1(), g.n2(), g.l1(), g.l2());
    let rho = match cfg.raw("acoustic.rho").parse::<f64>() {
        Ok(v) => ModelGrid::from_fn(n1, n2, l1, l2, |_, _| v)?,
        Err(_) => model_file(cfg.raw("acoustic.rho"), g)?,
    };
    let medium_err = |e: ellipsys::laguerre::LaguerreError| CliError::Config(e.to_string());
    match cfg.raw("acoustic.medium") {
        "homogeneous" => {
            let c: f64 = cfg.get("acoustic.speed")?;
            MediumModel::from_wave_speed(&ModelGrid::from_fn(n1, n2, l1, l2, |_, _| c)?, rho).map_err(medium_err)
        }
        "fault" => {
            let p = FaultParams {
                v_top: cfg.get("fault.v_top")?,
                v_bottom: cfg.get("fault.v_bottom")?,
                depth: cfg.get("fault.depth")?,
                throw: cfg.get("fault.throw")?,
                fault_r: cfg.get("fault.r")?,
                dip: cfg.get("fault.dip")?,
                rho: 1.0,
            };
            let speed = MediumModel::fault(n1, n2, l1, l2, &p).map_err(medium_err)?;
            // the generator's speed with the configured density
            let c = ModelGrid::new(n1, n2, l1, l2, speed.vs.values.iter().map(|v| v.sqrt()).collect())?;
            MediumModel::from_wave_speed(&c, rho).map_err(medium_err)
        }
        path => MediumModel::from_wave_speed(&model_file(path, g)?, rho).map_err(medium_err),
    }
}

fn acoustic(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let g = grid(cfg)?;
    let model = medium(cfg, &g)?;
    let params =
        LaguerreParams::new(cfg.get("laguerre.h")?, cfg.get("laguerre.alpha")?, cfg.get("laguerre.n")?).map_err(|e| CliError::Config(e.to_string()))?;
    let mut wavelet = Wavelet::new(cfg.get("wavelet.f0")?, cfg.get("wavelet.t0")?, cfg.get("wavelet.gamma")?).map_err(|e| CliError::Config(e.to_string()))?;
    wavelet.amplitude = cfg.get("wavelet.amplitude")?;
    let source = (cfg.get("acoustic.source_r")?, cfg.get("acoustic.source_z")?);
    let config = AcousticConfig {
        solver: cfg.get("solver.kind")?,
        options: solver_options(cfg)?,
        sov: sov_options(cfg)?,
        lanczos_steps: cfg.get("solver.lanczos_steps")?,
    };
    let series = solve_all_harmonics(&model, g, params, &wavelet, source, &config).map_err(CliError::solver)?;
    let receivers = cfg.points("acoustic.receivers")?;
    let (t_max, dt): (f64, f64) = (cfg.get("acoustic.t_max")?, cfg.get("acoustic.dt")?);
    let steps = (t_max / dt).round() as usize;
    let times: Vec<f64> = (0..=steps).map(|j| j as f64 * dt).collect();
    write(out, "seismograms.csv", &series.seismogram_csv(&receivers, &times).map_err(CliError::solver)?)?;
    let mut rec = String::from("receiver,r,z,node_r,node_z\n");
    for (n, &(r, z)) in receivers.iter().enumerate() {
        let (i, k) = g.nearest(r, z);
        let _ = writeln!(rec, "x{},{r},{z},{},{}", n + 1, g.r(i), g.z(k));
    }
    write(out, "receivers.csv", &rec)?;
    for t in cfg.list::<f64>("acoustic.snapshots", ',')? {
        let snap = series.snapshot_model(t).map_err(CliError::solver)?;
        let meta = [
            ("t", format!("{t}")),
            ("h", cfg.raw("laguerre.h").to_string()),
            ("alpha", cfg.raw("laguerre.alpha").to_string()),
            ("n_terms", cfg.raw("laguerre.n").to_string()),
        ];
        save_grid(out, &format!("snapshot_t{t:.4}.raw"), &snap, &meta)?;
    }
    let energies = series.partial_energies();
    let mut harm = String::from("m,iterations,energy,f_m\n");
    for (m, (e, f)) in energies.iter().zip(&series.source_coeffs).enumerate() {
        let _ = writeln!(harm, "{m},{},{e:e},{f:e}", series.iterations[m]);
    }
    write(out, "harmonics.csv", &harm)?;
    let mut lines = vec![
        ("m_delta", series.m_delta.to_string()),
        ("harmonics", series.harmonics.len().to_string()),
        ("tail_energy_ratio", format!("{:e}", series.tail_energy_ratio())),
        ("operator_checksum", format!("{:016x}", series.operator_checksum)),
    ];
    lines.extend(comm_lines(&series.comm));
    write(out, "report.txt", &report(&lines))
}

/// Random diagonally dominant matrix and `m` right-hand sides.
fn bench_problem(n: usize, m: usize, seed: u64) -> Result<(TridiagonalMatrix<f64>, Vec<Vec<f64>>), CliError> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let lower: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let upper: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let diag = (0..n)
        .map(|i| {
            let off = if i > 0 { lower[i - 1].abs() } else { 0.0 } + if i + 1 < n { upper[i].abs() } else { 0.0 };
            off + rng.gen_range(0.5..1.5)
        })
        .collect();
    let a = TridiagonalMatrix::new(lower, diag, upper).map_err(CliError::solver)?;
    let batch = (0..m).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    Ok((a, batch))
}

fn bench(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let exec = executor(cfg)?;
    let n: usize = cfg.get("bench.n")?;
    let m: usize = cfg.get("bench.batch")?;
    let ranks: Vec<usize> = cfg.list("bench.ranks", ',')?;
    if ranks.is_empty() || m == 0 || n < 2 {
        return Err(CliError::Config("bench needs ranks, a batch and n >= 2".into()));
    }
    let (lat, beta, gamma): (f64, f64, f64) = (cfg.get("bench.latency")?, cfg.get("bench.per_scalar")?, cfg.get("bench.per_add")?);
    let (a, batch) = bench_problem(n, m, cfg.get("bench.seed")?)?;
    let mut csv =
        String::from("p,levels,messages,scalars,reduces,prep_seconds,solve_seconds,model_dichotomy,model_cyclic,model_seconds,speedup,model_speedup,relres\n");
    let mut base: Option<(usize, f64, f64)> = None;
    for &p in &ranks {
        let part = Partition::uniform(n, p).map_err(|e| CliError::Config(e.to_string()))?;
        let t0 = Instant::now();
        let plan = DichotomyPlan::build(&a, part).map_err(CliError::solver)?;
        let prep = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let sol = plan.solve_many(exec, &batch).map_err(CliError::solver)?;
        let solve = t1.elapsed().as_secs_f64();
        let relres = (0..m)
            .map(|j| residual_relnorm(&a, &sol.x[j], &batch[j]).unwrap_or(f64::NAN))
            .fold(0.0, f64::max);
        let (dich, cyc) = if p >= 2 {
            (
                predict_time_dichotomy(p, m as f64, lat, beta, gamma).map_err(CliError::solver)?,
                predict_time_cyclic(p, m as f64, lat, beta, gamma).map_err(CliError::solver)?,
            )
        } else {
            (0.0, 0.0)
        };
        // local Thomas work (8 flops a row) plus the modelled exchange
        let model = 8.0 * (n as f64 / p as f64) * m as f64 * gamma + dich;
        let (prep, solve) = if exec == Executor::Threads { (prep, solve) } else { (0.0, 0.0) };
        let (p0, t_base, m_base) = *base.get_or_insert((p, solve, model));
        // measured only under threads
        let speedup = if exec == Executor::Threads && solve > 0.0 {
            format!("{:.3}", p0 as f64 * t_base / solve)
        } else {
            String::new()
        };
        let model_speedup = p0 as f64 * m_base / model;
        let s = &sol.stats;
        let _ = writeln!(
            csv,
            "{p},{},{},{},{},{prep:.6},{solve:.6},{dich:e},{cyc:e},{model:e},{speedup},{model_speedup:.3},{relres:e}",
            s.levels(),
            s.total_msgs(),
            s.total_scalars(),
            s.total_reduces()
        );
    }
    write(out, "bench.csv", &csv)
}

pub fn out_dir(cfg: &RunConfig) -> PathBuf {
    PathBuf::from(cfg.raw("output.dir"))
}
