mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_override, Command, RunConfig};
use error::CliError;

#[derive(Parser)]
#[command(name = "ellipsys", version, about = "Axisymmetric elliptic and acoustic solvers")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Constant-coefficient problem solved directly by the preconditioner.
    Poisson(Common),
    /// Variable-coefficient problem solved by PCG or Chebyshev iteration.
    Elliptic(Common),
    /// Wave propagation through Laguerre harmonics.
    Acoustic(Common),
    /// Dichotomy solver timings and traffic for several rank counts.
    Bench(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file (`[section]` headers, `key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    ranks: Option<usize>,
    /// `sim` or `threads`.
    #[arg(long)]
    executor: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    tol: Option<String>,
    /// Any configuration key, e.g. `--set grid.n1=128`; repeatable.
    #[arg(long = "set", value_parser = parse_override)]
    set: Vec<(String, String)>,
}

impl Common {
    fn overrides(&self) -> Vec<(String, String)> {
        let mut o = self.set.clone();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                o.push((k.to_string(), v));
            }
        };
        push("parallel.ranks", self.ranks.map(|v| v.to_string()));
        push("parallel.executor", self.executor.clone());
        push("output.dir", self.out.as_ref().map(|p| p.display().to_string()));
        push("solver.tol", self.tol.clone());
        o
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (cmd, common) = match &cli.command {
        Sub::Poisson(c) => (Command::Poisson, c),
        Sub::Elliptic(c) => (Command::Elliptic, c),
        Sub::Acoustic(c) => (Command::Acoustic, c),
        Sub::Bench(c) => (Command::Bench, c),
    };
    let cfg = RunConfig::load(cmd, common.config.as_deref(), &common.overrides())?;
    commands::run(&cfg, &commands::out_dir(&cfg))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ellipsys: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
