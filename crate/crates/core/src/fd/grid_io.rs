//! Coefficient model files.
//!
//! Text format: a header line `N1 N2 l1 l2`, then `N1·N2` whitespace
//! separated reals, `k` outer (all `r` values of the first `z` row come
//! first). Value `(i, k)` belongs to the node `r_i = (i + ½) h1`,
//! `z_k = (k + ½) h2` with `h1 = l1/(N1 − ½)`, `h2 = l2/(N2 − ½)`.
//!
//! Raw format: `N1·N2` little-endian IEEE 754 `f32` values in the same
//! order and nothing else, plus a sidecar text file named `<path>.hdr` whose
//! first line is `N1 N2 l1 l2`; further sidecar lines are `key = value`
//! metadata.

use std::fs;
use std::path::{Path, PathBuf};

use super::FdError;

/// A coefficient field on its own staggered grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGrid {
    pub n1: usize,
    pub n2: usize,
    pub l1: f64,
    pub l2: f64,
    pub values: Vec<f64>,
}

impl ModelGrid {
    pub fn new(n1: usize, n2: usize, l1: f64, l2: f64, values: Vec<f64>) -> Result<Self, FdError> {
        if n1 < 2 || n2 < 2 || !(l1 > 0.0) || !(l2 > 0.0) {
            return Err(FdError::Format(format!("bad header {n1} {n2} {l1} {l2}")));
        }
        if values.len() != n1 * n2 {
            return Err(FdError::DimensionMismatch {
                expected: n1 * n2,
                found: values.len(),
            });
        }
        Ok(Self { n1, n2, l1, l2, values })
    }

    /// Samples `g` at this grid's nodes.
    pub fn from_fn(n1: usize, n2: usize, l1: f64, l2: f64, g: impl Fn(f64, f64) -> f64) -> Result<Self, FdError> {
        let h1 = l1 / (n1 as f64 - 0.5);
        let h2 = l2 / (n2 as f64 - 0.5);
        let mut values = Vec::with_capacity(n1 * n2);
        for k in 0..n2 {
            for i in 0..n1 {
                values.push(g((i as f64 + 0.5) * h1, (k as f64 + 0.5) * h2));
            }
        }
        Self::new(n1, n2, l1, l2, values)
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.values[k * self.n1 + i]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Bilinear interpolation between nodes, constant extension outside.
    pub fn sample(&self, r: f64, z: f64) -> f64 {
        let h1 = self.l1 / (self.n1 as f64 - 0.5);
        let h2 = self.l2 / (self.n2 as f64 - 0.5);
        let locate = |x: f64, h: f64, n: usize| -> (usize, f64) {
            let t = (x / h - 0.5).clamp(0.0, (n - 1) as f64);
            let j = (t.floor() as usize).min(n - 2);
            (j, t - j as f64)
        };
        let (i, u) = locate(r, h1, self.n1);
        let (k, v) = locate(z, h2, self.n2);
        let f00 = self.get(i, k);
        let f10 = self.get(i + 1, k);
        let f01 = self.get(i, k + 1);
        let f11 = self.get(i + 1, k + 1);
        (1.0 - v) * ((1.0 - u) * f00 + u * f10) + v * ((1.0 - u) * f01 + u * f11)
    }

    fn header(&self) -> String {
        format!("{} {} {} {}", self.n1, self.n2, fmt_real(self.l1), fmt_real(self.l2))
    }
}

/// Shortest text that parses back to the same `f64`.
fn fmt_real(x: f64) -> String {
    format!("{x:?}")
}

fn parse_header(line: &str) -> Result<(usize, usize, f64, f64), FdError> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != 4 {
        return Err(FdError::Format(format!("header must be 'N1 N2 l1 l2', got '{line}'")));
    }
    let bad = |what: &str| FdError::Format(format!("cannot parse {what} in header '{line}'"));
    Ok((
        parts[0].parse().map_err(|_| bad("N1"))?,
        parts[1].parse().map_err(|_| bad("N2"))?,
        parts[2].parse().map_err(|_| bad("l1"))?,
        parts[3].parse().map_err(|_| bad("l2"))?,
    ))
}

pub fn read_model_text(path: &Path) -> Result<ModelGrid, FdError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| FdError::Format("empty model file".into()))?;
    let (n1, n2, l1, l2) = parse_header(header)?;
    let values = lines
        .flat_map(str::split_whitespace)
        .map(|t| t.parse::<f64>().map_err(|_| FdError::Format(format!("bad value '{t}'"))))
        .collect::<Result<Vec<_>, _>>()?;
    ModelGrid::new(n1, n2, l1, l2, values)
}

/// Writes the text format, one `r` line per row.
pub fn write_model_text(path: &Path, m: &ModelGrid) -> Result<(), FdError> {
    let mut s = m.header();
    s.push('\n');
    for k in 0..m.n2 {
        let row: Vec<String> = (0..m.n1).map(|i| fmt_real(m.get(i, k))).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    fs::write(path, s)?;
    Ok(())
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".hdr");
    PathBuf::from(s)
}

pub fn read_model_raw(path: &Path) -> Result<ModelGrid, FdError> {
    let side = fs::read_to_string(sidecar_path(path))?;
    let header = side.lines().next().ok_or_else(|| FdError::Format("empty sidecar".into()))?;
    let (n1, n2, l1, l2) = parse_header(header)?;
    let bytes = fs::read(path)?;
    if bytes.len() != 4 * n1 * n2 {
        return Err(FdError::DimensionMismatch {
            expected: 4 * n1 * n2,
            found: bytes.len(),
        });
    }
    let values = bytes.chunks_exact(4).map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]]))).collect();
    ModelGrid::new(n1, n2, l1, l2, values)
}

/// Writes the raw format and its sidecar. `meta` lines are appended to the
/// sidecar as `key = value`.
pub fn write_model_raw(path: &Path, m: &ModelGrid, meta: &[(&str, String)]) -> Result<(), FdError> {
    let mut bytes = Vec::with_capacity(4 * m.values.len());
    for &v in &m.values {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    fs::write(path, bytes)?;
    let mut side = m.header();
    side.push('\n');
    for (k, v) in meta {
        side.push_str(&format!("{k} = {v}\n"));
    }
    fs::write(sidecar_path(path), side)?;
    Ok(())
}

/// Reads either format: raw when a sidecar exists, text otherwise.
pub fn read_model(path: &Path) -> Result<ModelGrid, FdError> {
    if sidecar_path(path).exists() {
        read_model_raw(path)
    } else {
        read_model_text(path)
    }
}
