//! Discretized Bessel paths against a constant barrier: exact marginal
//! transitions (noncentral chi-square) on adaptive substeps plus a
//! Brownian-bridge correction for crossings inside a substep.
//!
//! Crossing is defined relative to the particle's side at birth: the path
//! crosses once it sits on the opposite side of the barrier. Bridge-detected
//! crossings report the barrier itself as the crossing position; sign-flip
//! detections report the overshooting endpoint, which lies within a few
//! √(substep) of the barrier.

use crate::specfun::sample_bessel;
use rand::Rng;

#[derive(Debug, Clone, Copy)]
pub struct SubstepPolicy {
    /// Largest substep.
    pub base: f64,
    /// Smallest substep, used against the barrier.
    pub floor: f64,
}

impl SubstepPolicy {
    pub fn new(base: f64, floor: f64) -> Self {
        Self { base, floor: floor.min(base) }
    }

    /// Standard step-length controller: (distance/6)² clamped to [floor, base].
    fn next(&self, dist: f64, remaining: f64) -> f64 {
        let proposal = (dist / 6.0) * (dist / 6.0);
        proposal.clamp(self.floor, self.base).min(remaining)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathOutcome {
    /// Crossed the barrier at `time` (relative to the segment start).
    Crossed { time: f64, pos: f64, substep: f64 },
    /// Alive at the segment end at position `pos`.
    Survived { pos: f64 },
}

/// Run a d-dimensional Bessel path from `r0` over `[0, horizon]` against the
/// constant barrier `lambda`; `side` is the sign of (birth position − barrier
/// at birth), fixed for the particle's whole life.
pub fn run_against_barrier<R: Rng + ?Sized>(
    d: u32,
    r0: f64,
    side: f64,
    lambda: f64,
    horizon: f64,
    policy: SubstepPolicy,
    rng: &mut R,
) -> PathOutcome {
    let mut r = r0;
    let mut t = 0.0;
    if (r - lambda) * side < 0.0 {
        return PathOutcome::Crossed { time: 0.0, pos: r, substep: 0.0 };
    }
    while t < horizon {
        let dt = policy.next((r - lambda).abs(), horizon - t);
        let r_next = sample_bessel(d, r, dt, rng);
        t += dt;
        if (r_next - lambda) * side < 0.0 {
            return PathOutcome::Crossed { time: t, pos: r_next, substep: dt };
        }
        // both endpoints on the initial side: Brownian-bridge crossing check
        let prod = (r - lambda) * (r_next - lambda);
        if prod >= 0.0 {
            let p = (-2.0 * prod / dt).exp();
            if p > 0.0 && rng.random::<f64>() < p {
                return PathOutcome::Crossed { time: t - 0.5 * dt, pos: lambda, substep: dt };
            }
        }
        r = r_next;
    }
    PathOutcome::Survived { pos: r }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, StreamKind};
    use crate::specfun::hit_laplace;

    /// The bridge-corrected simulator reproduces the closed-form Laplace
    /// transform of the hitting time within MC + discretization error.
    #[test]
    fn laplace_transform_against_closed_form() {
        let (d, x, lambda, theta) = (3u32, 1.3, 1.0, 1.0);
        let n = 40_000;
        let policy = SubstepPolicy::new(1e-3, 1e-5);
        let horizon = 20.0; // e^{-θ·20} is negligible
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for i in 0..n {
            let mut rng = stream(17, StreamKind::Generic, i as u64);
            let v = match run_against_barrier(d, x, 1.0, lambda, horizon, policy, &mut rng) {
                PathOutcome::Crossed { time, .. } => (-theta * time).exp(),
                PathOutcome::Survived { .. } => 0.0,
            };
            sum += v;
            sumsq += v * v;
        }
        let mean = sum / n as f64;
        let sd = ((sumsq / n as f64 - mean * mean) / n as f64).sqrt();
        let want = hit_laplace(d, x, lambda, theta).unwrap();
        assert!(
            (mean - want).abs() < 3.0 * sd + 3e-3,
            "MC {mean} vs closed form {want} (3σ = {})",
            3.0 * sd
        );
    }

    #[test]
    fn born_on_wrong_side_crosses_immediately() {
        let mut rng = stream(1, StreamKind::Generic, 0);
        let out = run_against_barrier(3, 0.8, 1.0, 1.0, 1.0, SubstepPolicy::new(1e-3, 1e-5), &mut rng);
        assert!(matches!(out, PathOutcome::Crossed { time, .. } if time == 0.0));
    }
}
