//! Free-boundary trajectory, the Gibbs–Thomson law, and the energy audit.

use crate::error::{Result, SimError};

/// Gibbs–Thomson boundary temperature H(x) = γ/x, with H(0) := 0.
///
/// The zero convention makes H total; it only matters once the solid has
/// fully melted (d = 1 bookkeeping).
pub fn gibbs_thomson(x: f64, gamma: f64) -> f64 {
    if x > 0.0 {
        gamma / x
    } else {
        0.0
    }
}

/// Global bound sup_t Λ_t ≤ (d + Λ_{0-}^d)^{1/d} implied by the forward
/// representation; enforced as a runtime invariant.
pub fn apriori_radius_bound(d: u32, lambda_init: f64) -> f64 {
    (d as f64 + lambda_init.powi(d as i32)).powf(1.0 / d as f64)
}

/// One recorded discontinuity of the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpRecord {
    /// Index m such that the jump is the transition Λ_{mΔ} → Λ_{(m+1)Δ}.
    pub step: usize,
    /// Time (m+1)Δ at which the new radius takes effect.
    pub time: f64,
    pub lambda_before: f64,
    pub lambda_after: f64,
}

impl JumpRecord {
    pub fn drop(&self) -> f64 {
        self.lambda_before - self.lambda_after
    }
}

/// Right-continuous piecewise-constant radius trajectory on the time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPath {
    pub delta_t: f64,
    /// Λ at times 0, Δ, 2Δ, ...; Λ_0 equals the initial radius Λ_{0-}.
    pub radii: Vec<f64>,
    pub jumps: Vec<JumpRecord>,
}

impl BoundaryPath {
    pub fn times(&self) -> Vec<f64> {
        (0..self.radii.len()).map(|m| m as f64 * self.delta_t).collect()
    }

    /// Value of the right-continuous extension at time t.
    pub fn value_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.radii[0];
        }
        let m = (t / self.delta_t).floor() as usize;
        let m = m.min(self.radii.len() - 1);
        self.radii[m]
    }

    /// First time the radius hits zero, if it does (the melt time ζ).
    pub fn melt_time(&self) -> Option<f64> {
        self.radii.iter().position(|&r| r == 0.0).map(|m| m as f64 * self.delta_t)
    }

    /// Structural invariants: non-negative radii below the a-priori bound,
    /// and zero absorbing.
    pub fn check_invariants(&self, d: u32) -> Result<()> {
        let bound = apriori_radius_bound(d, self.radii[0]);
        let mut melted = false;
        for (m, &r) in self.radii.iter().enumerate() {
            if r < 0.0 || !r.is_finite() {
                return Err(SimError::Invariant(format!("radius {r} at step {m}")));
            }
            if r > bound * (1.0 + 1e-12) {
                return Err(SimError::Invariant(format!(
                    "radius {r} at step {m} exceeds the a-priori bound {bound}"
                )));
            }
            if melted && r != 0.0 {
                return Err(SimError::Invariant(format!(
                    "radius {r} at step {m} after complete melting"
                )));
            }
            if r == 0.0 {
                melted = true;
            }
        }
        Ok(())
    }
}

/// Per-step energy ledger: the ν-mass of u, the phase volume Λ^d/d, and the
/// violation of their conservation.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditRow {
    pub step: usize,
    pub time: f64,
    /// Official ν-mass of u^Δ(mΔ,·) (exact sub-cell accounting).
    pub mass: f64,
    /// Λ^d/d at mΔ.
    pub volume: f64,
    /// Energy-balance residual of the single transition into this step
    /// (G at the selected root; zero for the initial row).
    pub residual_step: f64,
    /// (mass + volume) − (mass_0 + volume_0).
    pub residual_cum: f64,
    /// Stored-array ν-mass minus the official mass: the O(h) node-sampling
    /// loss of the freeze, recorded rather than folded into the identity.
    pub sampling_loss: f64,
    /// True on the complete-melting step, where the identity is exempt.
    pub is_melt: bool,
}

#[derive(Debug, Clone, Default)]
pub struct EnergyAudit {
    pub rows: Vec<AuditRow>,
}

impl EnergyAudit {
    /// Largest per-step residual outside the melt step.
    pub fn max_residual_excl_melt(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| !r.is_melt)
            .fold(0.0f64, |m, r| m.max(r.residual_step.abs()))
    }
}
