//! Simulation configuration and initial data.
//!
//! The domain is the truncated half-line [0, x_max] with a uniform mesh; the
//! temperature deficit u(t,·) is a density against ν(dx) = x^{d-1} dx and is
//! taken identically zero beyond x_max (initial data is required to decay).

use crate::error::{Result, SimError};
use crate::profile::TemperatureProfile;

/// Propagator used by the frozen-boundary heat step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Exact kernel convolution by the method of images; d ∈ {1, 3} only.
    /// Near-exact in time, O(h²) from the piecewise-linear profile.
    Images,
    /// Implicit finite differences, any d ≥ 1. Production path.
    FiniteDifference,
    /// Pathwise Monte Carlo with bridge-corrected crossing detection.
    MonteCarlo,
}

/// Step-length law for a single frozen-boundary propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HorizonKind {
    /// Propagate for exactly Δ.
    Deterministic,
    /// Propagate for an independent Exponential(1/Δ) time (resolvent weights
    /// on the images backend, sampled horizons on the Monte Carlo backend).
    Exponential,
}

/// Shape of the initial temperature deficit u(0-,·).
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// c on [a, b], zero elsewhere.
    Indicator { a: f64, b: f64, height: f64 },
    /// c·exp(-alpha·x).
    Exponential { c: f64, alpha: f64 },
    /// Explicit node values (must match the grid length).
    Table(Vec<f64>),
}

impl InitialData {
    pub fn sample(&self, grid: &[f64]) -> Result<Vec<f64>> {
        match self {
            InitialData::Indicator { a, b, height } => {
                if !(a.is_finite() && b.is_finite()) || a < &0.0 || b < a || *height < 0.0 {
                    return Err(SimError::Config(format!(
                        "indicator initial data needs 0 <= a <= b and height >= 0, got a={a}, b={b}, height={height}"
                    )));
                }
                Ok(grid
                    .iter()
                    .map(|&x| if x >= *a && x <= *b { *height } else { 0.0 })
                    .collect())
            }
            InitialData::Exponential { c, alpha } => {
                if *c < 0.0 || *alpha <= 0.0 {
                    return Err(SimError::Config(format!(
                        "exponential initial data needs c >= 0 and alpha > 0, got c={c}, alpha={alpha}"
                    )));
                }
                Ok(grid.iter().map(|&x| c * (-alpha * x).exp()).collect())
            }
            InitialData::Table(values) => {
                if values.len() != grid.len() {
                    return Err(SimError::Config(format!(
                        "table initial data has {} values but the grid has {} nodes",
                        values.len(),
                        grid.len()
                    )));
                }
                if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(SimError::Config(
                        "table initial data must be finite and non-negative".into(),
                    ));
                }
                Ok(values.clone())
            }
        }
    }
}

/// Full configuration of one Euler-scheme run.
#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Ambient dimension d ≥ 1 of the Bessel process.
    pub d: u32,
    /// Surface tension γ > 0 in the boundary law H(x) = γ/x.
    pub gamma: f64,
    /// Time step Δ > 0.
    pub delta_t: f64,
    /// Spatial step h > 0.
    pub mesh: f64,
    /// Domain truncation radius.
    pub x_max: f64,
    /// Horizon T.
    pub horizon: f64,
    /// Initial radius Λ_{0-} > 0.
    pub lambda_init: f64,
    /// Initial deficit profile u(0-,·).
    pub u_init: InitialData,
    pub backend: Backend,
    pub horizon_kind: HorizonKind,
    /// RNG seed for every stochastic component.
    pub seed: u64,
    /// Rescale u(0-,·) so its ν-mass is 1; otherwise only warn when the
    /// standing assumptions (mass 1, sup < 1) fail.
    pub normalize_mass: bool,
}

impl SimConfig {
    /// Number of cells; the grid is 0, h, ..., K·h with K·h = x_max (snapped).
    pub fn cells(&self) -> usize {
        (self.x_max / self.mesh).round().max(1.0) as usize
    }

    pub fn grid(&self) -> Vec<f64> {
        let k = self.cells();
        (0..=k).map(|i| i as f64 * self.mesh).collect()
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.delta_t).ceil().max(0.0) as usize
    }

    /// Validate every structural invariant; returns the sampled, optionally
    /// normalized initial profile on success.
    pub fn validate(&self) -> Result<TemperatureProfile> {
        if self.d < 1 {
            return Err(SimError::Config("dimension d must be >= 1".into()));
        }
        if !(self.gamma > 0.0) {
            return Err(SimError::Config("gamma must be > 0".into()));
        }
        if !(self.delta_t > 0.0) {
            return Err(SimError::Config("delta_t must be > 0".into()));
        }
        if !(self.horizon >= 0.0) {
            return Err(SimError::Config("horizon must be >= 0".into()));
        }
        if !(self.lambda_init > 0.0) {
            return Err(SimError::Config("lambda_init must be > 0".into()));
        }
        if !(self.mesh > 0.0 && self.mesh < self.lambda_init) {
            return Err(SimError::Config("mesh exceeds initial radius".into()));
        }
        let needed = self.lambda_init + 6.0 * self.horizon.sqrt();
        if self.x_max <= needed {
            return Err(SimError::Config(format!(
                "x_max={} too small: need x_max > lambda_init + 6*sqrt(horizon) = {:.6}",
                self.x_max, needed
            )));
        }
        if self.horizon_kind == HorizonKind::Exponential && self.backend == Backend::FiniteDifference
        {
            return Err(SimError::Config(
                "exponential horizon is only available on the images and monte-carlo backends"
                    .into(),
            ));
        }

        let grid = self.grid();
        let mut values = self.u_init.sample(&grid)?;
        let profile = TemperatureProfile::new(self.mesh, values.clone())?;
        let mass = profile.nu_mass(self.d);
        if self.normalize_mass {
            if mass <= 0.0 {
                return Err(SimError::Config(
                    "cannot normalize: initial profile has zero nu-mass".into(),
                ));
            }
            for v in &mut values {
                *v /= mass;
            }
            log::info!("initial profile rescaled by 1/{mass:.6e} to unit nu-mass (value rescale, not the space rescale of the continuum statement)");
        } else {
            let sup = profile.sup_norm();
            if (mass - 1.0).abs() > 1e-9 {
                log::warn!("initial nu-mass is {mass:.6} (standing assumption wants 1); proceeding un-normalized");
            }
            if sup >= 1.0 {
                log::warn!("initial sup-norm is {sup:.6} >= 1 (hypercooled regime excluded by the standing assumption); proceeding");
            }
        }
        TemperatureProfile::new(self.mesh, values)
    }
}
