//! `key = value` configuration with `[section]` headers.
//!
//! A key inside `[solver]` named `tol` is addressed as `solver.tol`; dotted
//! keys may also be written directly. `#` starts a comment. Every key has a
//! default, which may depend on the subcommand; unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Poisson,
    Elliptic,
    Acoustic,
    Bench,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Poisson => "poisson",
            Self::Elliptic => "elliptic",
            Self::Acoustic => "acoustic",
            Self::Bench => "bench",
        }
    }
}

/// `(key, default, acoustic default)`; the third column overrides the
/// second for `acoustic` when present.
const SCHEMA: &[(&str, &str, Option<&str>)] = &[
    ("grid.n1", "64", Some("256")),
    ("grid.n2", "64", Some("256")),
    ("grid.l1", "1.0", Some("2560.0")),
    ("grid.l2", "1.0", Some("2560.0")),
    ("model.kappa", "smooth", None),
    ("model.q", "0", None),
    ("model.source", "bump", None),
    ("poisson.vtilde", "1.0", None),
    ("poisson.shift", "0.0", None),
    ("solver.kind", "pcg", None),
    ("solver.tol", "1e-10", None),
    ("solver.maxiter", "1000", None),
    ("solver.check_every", "8", None),
    ("solver.lanczos_steps", "50", None),
    ("precond.vtilde_mode", "auto", None),
    ("precond.vtilde", "1.0", None),
    ("precond.shift_mode", "average", Some("acoustic")),
    ("precond.lazy_plans", "false", None),
    ("parallel.ranks", "1", None),
    ("parallel.executor", "sim", None),
    ("laguerre.h", "400.0", None),
    ("laguerre.alpha", "5", None),
    ("laguerre.n", "128", None),
    ("wavelet.f0", "8.0", None),
    ("wavelet.t0", "0.35", None),
    ("wavelet.gamma", "4.0", None),
    ("wavelet.amplitude", "1.0", None),
    ("acoustic.medium", "homogeneous", None),
    ("acoustic.speed", "2000.0", None),
    ("acoustic.rho", "1.0", None),
    ("acoustic.source_r", "0.0", None),
    ("acoustic.source_z", "1280.0", None),
    ("acoustic.receivers", "300:1280;600:1280;900:1280", None),
    ("acoustic.t_max", "1.0", None),
    ("acoustic.dt", "0.005", None),
    ("acoustic.snapshots", "", None),
    ("fault.v_top", "1800.0", None),
    ("fault.v_bottom", "2600.0", None),
    ("fault.depth", "900.0", None),
    ("fault.throw", "300.0", None),
    ("fault.r", "1200.0", None),
    ("fault.dip", "0.0", None),
    ("bench.ranks", "1,2,4,8", None),
    ("bench.n", "65536", None),
    ("bench.batch", "32", None),
    ("bench.seed", "1", None),
    ("bench.latency", "1e-6", None),
    ("bench.per_scalar", "1e-9", None),
    ("bench.per_add", "1e-9", None),
    ("output.dir", "out", None),
];

/// Resolved configuration: every schema key with a value.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    values: BTreeMap<String, String>,
}

fn known(key: &str) -> bool {
    SCHEMA.iter().any(|(k, _, _)| *k == key)
}

/// Parses `key = value` lines.
pub fn parse_entries(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut section = String::new();
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| CliError::Config(format!("line {}: unterminated section header", no + 1)))?;
            section = name.trim().to_string();
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", no + 1)))?;
        let k = k.trim();
        let key = if section.is_empty() || k.contains('.') {
            k.to_string()
        } else {
            format!("{section}.{k}")
        };
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

impl RunConfig {
    /// Defaults for `command`, then the file, then `overrides` in order.
    pub fn resolve(command: Command, file: Option<&str>, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (k, d, ac) in SCHEMA {
            let v = match (command, ac) {
                (Command::Acoustic, Some(a)) => a,
                _ => d,
            };
            values.insert(k.to_string(), v.to_string());
        }
        let mut entries = match file {
            Some(text) => parse_entries(text)?,
            None => Vec::new(),
        };
        entries.extend(overrides.iter().cloned());
        for (k, v) in entries {
            if !known(&k) {
                return Err(CliError::Config(format!("unknown key `{k}`")));
            }
            values.insert(k, v);
        }
        let cfg = Self { command, values };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(command: Command, path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let text = match path {
            Some(p) => Some(std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?),
            None => None,
        };
        Self::resolve(command, text.as_deref(), overrides)
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values
            .get(key)
            .map(String::as_str)
            .unwrap_or_else(|| panic!("key {key} missing from schema"))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.raw(key);
        v.parse().map_err(|e| CliError::Config(format!("{key} = `{v}`: {e}")))
    }

    pub fn list<T: FromStr>(&self, key: &str, sep: char) -> Result<Vec<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .split(sep)
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|e| CliError::Config(format!("{key}: `{s}`: {e}"))))
            .collect()
    }

    /// `r:z` pairs separated by `;`.
    pub fn points(&self, key: &str) -> Result<Vec<(f64, f64)>, CliError> {
        self.raw(key)
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                let (r, z) = s.split_once(':').ok_or_else(|| CliError::Config(format!("{key}: expected r:z, got `{s}`")))?;
                let p = |x: &str| x.trim().parse::<f64>().map_err(|e| CliError::Config(format!("{key}: `{s}`: {e}")));
                Ok((p(r)?, p(z)?))
            })
            .collect()
    }

    fn validate(&self) -> Result<(), CliError> {
        let positive = |k: &str| -> Result<(), CliError> {
            let v: f64 = self.get(k)?;
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Config(format!("{k} must be positive, got {v}")))
            }
        };
        for k in ["grid.l1", "grid.l2", "solver.tol", "laguerre.h", "wavelet.f0", "wavelet.gamma", "acoustic.dt"] {
            positive(k)?;
        }
        for k in ["grid.n1", "grid.n2"] {
            if self.get::<usize>(k)? < 2 {
                return Err(CliError::Config(format!("{k} must be at least 2")));
            }
        }
        if self.get::<usize>("parallel.ranks")? == 0 {
            return Err(CliError::Config("parallel.ranks must be at least 1".into()));
        }
        self.get::<usize>("solver.maxiter")?;
        self.get::<usize>("solver.check_every")?;
        self.get::<u32>("laguerre.alpha")?;
        self.get::<usize>("laguerre.n")?;
        self.get::<bool>("precond.lazy_plans")?;
        self.get::<ellipsys::comm::Executor>("parallel.executor")?;
        self.get::<ellipsys::iterative::SolverKind>("solver.kind")?;
        for (k, allowed) in [
            ("precond.vtilde_mode", &["auto", "manual"][..]),
            ("precond.shift_mode", &["acoustic", "average"][..]),
        ] {
            if !allowed.contains(&self.raw(k)) {
                return Err(CliError::Config(format!("{k} must be one of {allowed:?}")));
            }
        }
        self.points("acoustic.receivers")?;
        self.list::<f64>("acoustic.snapshots", ',')?;
        self.list::<usize>("bench.ranks", ',')?;
        Ok(())
    }

    /// Every key with its resolved value, grouped by section.
    pub fn effective(&self) -> String {
        let mut s = format!("# effective configuration for `{}`\n", self.command.name());
        let mut section = "";
        for (k, v) in &self.values {
            let (sec, name) = k.split_once('.').unwrap_or(("", k));
            if sec != section {
                let _ = write!(s, "\n[{sec}]\n");
                section = sec;
            }
            let _ = writeln!(s, "{name} = {v}");
        }
        s
    }
}

/// Splits `key=value`.
pub fn parse_override(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_dotted_keys() {
        let text = "# comment\n[solver]\ntol = 1e-8 # trailing\nkind=chebyshev\n\n[grid]\nn1 = 32\nparallel.ranks = 3\n";
        let c = RunConfig::resolve(Command::Elliptic, Some(text), &[]).unwrap();
        assert_eq!(c.get::<f64>("solver.tol").unwrap(), 1e-8);
        assert_eq!(c.raw("solver.kind"), "chebyshev");
        assert_eq!(c.get::<usize>("grid.n1").unwrap(), 32);
        assert_eq!(c.get::<usize>("parallel.ranks").unwrap(), 3);
    }

    #[test]
    fn overrides_win_and_defaults_depend_on_command() {
        let c = RunConfig::resolve(Command::Acoustic, Some("[grid]\nn1 = 100\n"), &[("grid.n1".into(), "50".into())]).unwrap();
        assert_eq!(c.raw("grid.n1"), "50");
        assert_eq!(c.raw("grid.l1"), "2560.0");
        assert_eq!(c.raw("precond.shift_mode"), "acoustic");
        let e = RunConfig::resolve(Command::Elliptic, None, &[]).unwrap();
        assert_eq!(e.raw("grid.l1"), "1.0");
    }

    #[test]
    fn effective_config_round_trips() {
        let c = RunConfig::resolve(Command::Bench, Some("[bench]\nranks = 2,4\n"), &[]).unwrap();
        let again = RunConfig::resolve(Command::Bench, Some(&c.effective()), &[]).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn bad_input_is_a_config_error() {
        for text in [
            "[grid\n",
            "no equals sign\n",
            "bogus.key = 1\n",
            "[solver]\ntol = -1\n",
            "[parallel]\nexecutor = mpi\n",
            "[grid]\nn1 = 1\n",
        ] {
            let e = RunConfig::resolve(Command::Poisson, Some(text), &[]).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{text}");
        }
    }

    #[test]
    fn receiver_lists() {
        let c = RunConfig::resolve(Command::Acoustic, None, &[("acoustic.receivers".into(), "1:2; 3.5:4".into())]).unwrap();
        assert_eq!(c.points("acoustic.receivers").unwrap(), vec![(1.0, 2.0), (3.5, 4.0)]);
    }
}
