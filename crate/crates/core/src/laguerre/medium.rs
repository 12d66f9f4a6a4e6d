use super::LaguerreError;
use crate::fd::ModelGrid;

/// Coefficient fields of the wave equation: `V` (the diffusion coefficient
/// in `∇(V ∇u)`) and the density `ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MediumModel {
    pub vs: ModelGrid,
    pub rho: ModelGrid,
}

/// Two layers offset by a vertical throw across a fault plane.
///
/// The interface sits at depth `depth` for `r < fault_r` and at
/// `depth + throw` beyond it; `dip` (degrees from vertical) tilts the
/// fault plane. Speeds are in m/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultParams {
    pub v_top: f64,
    pub v_bottom: f64,
    pub depth: f64,
    pub throw: f64,
    pub fault_r: f64,
    pub dip: f64,
    pub rho: f64,
}

impl Default for FaultParams {
    fn default() -> Self {
        Self {
            v_top: 1800.0,
            v_bottom: 2600.0,
            depth: 900.0,
            throw: 300.0,
            fault_r: 1200.0,
            dip: 0.0,
            rho: 1.0,
        }
    }
}

impl MediumModel {
    pub fn new(vs: ModelGrid, rho: ModelGrid) -> Result<Self, LaguerreError> {
        if (vs.l1, vs.l2) != (rho.l1, rho.l2) {
            return Err(LaguerreError::Medium("V and ρ cover different extents".into()));
        }
        for (name, m) in [("V", &vs), ("ρ", &rho)] {
            if !(m.min() > 0.0) || !m.max().is_finite() {
                return Err(LaguerreError::Medium(format!("{name} must be positive and finite")));
            }
        }
        Ok(Self { vs, rho })
    }

    /// `V = (c/ρ)²`, which makes `c` the propagation speed of
    /// `ρ⁻² u_tt = ∇(V ∇u)`.
    pub fn from_wave_speed(speed: &ModelGrid, rho: ModelGrid) -> Result<Self, LaguerreError> {
        if (speed.n1, speed.n2) != (rho.n1, rho.n2) {
            return Err(LaguerreError::Medium("speed and density grids differ".into()));
        }
        let values = speed.values.iter().zip(&rho.values).map(|(c, r)| (c / r).powi(2)).collect();
        let vs = ModelGrid::new(speed.n1, speed.n2, speed.l1, speed.l2, values)?;
        Self::new(vs, rho)
    }

    pub fn homogeneous(n1: usize, n2: usize, l1: f64, l2: f64, speed: f64, rho: f64) -> Result<Self, LaguerreError> {
        let c = ModelGrid::from_fn(n1, n2, l1, l2, |_, _| speed)?;
        Self::from_wave_speed(&c, ModelGrid::from_fn(n1, n2, l1, l2, |_, _| rho)?)
    }

    pub fn fault(n1: usize, n2: usize, l1: f64, l2: f64, p: &FaultParams) -> Result<Self, LaguerreError> {
        let tan = p.dip.to_radians().tan();
        let c = ModelGrid::from_fn(n1, n2, l1, l2, |r, z| {
            let plane = p.fault_r + (z - p.depth) * tan;
            let interface = if r < plane { p.depth } else { p.depth + p.throw };
            if z < interface {
                p.v_top
            } else {
                p.v_bottom
            }
        })?;
        Self::from_wave_speed(&c, ModelGrid::from_fn(n1, n2, l1, l2, |_, _| p.rho)?)
    }

    pub fn vs_at(&self, r: f64, z: f64) -> f64 {
        self.vs.sample(r, z)
    }

    pub fn rho_at(&self, r: f64, z: f64) -> f64 {
        self.rho.sample(r, z)
    }

    /// Largest propagation speed `√V ρ`.
    pub fn max_speed(&self) -> f64 {
        self.vs.values.iter().zip(&self.rho.values).map(|(v, r)| v.sqrt() * r).fold(0.0, f64::max)
    }
}
