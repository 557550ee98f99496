//! Backward Feynman–Kac estimate of u(t, x) against a full (jumpy) boundary
//! path: run the process backward in boundary time, stopping at the first
//! s with (R_s − Λ_{t−s})(x − Λ_t) ≤ 0 and paying H at the stopping
//! position, u(0−, R_t) otherwise. Used to validate Euler profiles as
//! approximations of the limit temperature.

use crate::boundary::{gibbs_thomson, BoundaryPath};
use crate::error::{Result, SimError};
use crate::pathsim::{run_against_barrier, PathOutcome, SubstepPolicy};
use crate::profile::TemperatureProfile;
use crate::rng::{stream, StreamKind};
use rayon::prelude::*;

/// Monte Carlo estimate of u(t, x); returns (mean, standard error).
#[allow(clippy::too_many_arguments)]
pub fn backward_fk_estimate(
    path: &BoundaryPath,
    t: f64,
    x: f64,
    u0: &TemperatureProfile,
    gamma: f64,
    d: u32,
    n_paths: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if n_paths == 0 {
        return Err(SimError::Config("need at least one path".into()));
    }
    let t_last = (path.radii.len() - 1) as f64 * path.delta_t;
    if t < 0.0 || t > t_last + 1e-12 {
        return Err(SimError::Domain(format!("t={t} outside the path horizon {t_last}")));
    }
    let lambda_t = path.value_at(t);
    let sign_ref = x - lambda_t;
    if sign_ref == 0.0 {
        return Ok((gibbs_thomson(x, gamma), 0.0));
    }
    let side = sign_ref.signum();

    // backward segments: on (s_a, s_b] the level Λ_{t-s} is constant
    let mut breaks: Vec<f64> = Vec::new();
    let mut k = (t / path.delta_t).ceil() as i64 - 1;
    while k >= 0 {
        let s = t - k as f64 * path.delta_t;
        if s > 1e-15 && s < t - 1e-15 {
            breaks.push(s);
        }
        k -= 1;
    }
    breaks.push(t);

    let delta = path.delta_t;
    let policy = SubstepPolicy::new(delta / 20.0, delta / 1280.0);
    let payoffs: Vec<f64> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, StreamKind::Generic, i as u64);
            let mut r = x;
            let mut s_prev = 0.0;
            for &s_b in &breaks {
                let s_mid = 0.5 * (s_prev + s_b);
                let level = path.value_at(t - s_mid);
                // swallow check at the segment start (the level just moved)
                if (r - level) * side <= 0.0 {
                    return gibbs_thomson(r, gamma);
                }
                match run_against_barrier(d, r, side, level, s_b - s_prev, policy, &mut rng) {
                    PathOutcome::Crossed { pos, .. } => {
                        // the continuous path met the level; evaluate H there,
                        // with bridge detections reporting the level itself
                        let at = if (pos - level).abs() < 1e-12 { level } else { pos };
                        return gibbs_thomson(at, gamma);
                    }
                    PathOutcome::Survived { pos } => r = pos,
                }
                s_prev = s_b;
            }
            u0.value_at(r)
        })
        .collect();

    let n = n_paths as f64;
    let mean = payoffs.iter().sum::<f64>() / n;
    let var = payoffs.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    Ok((mean, (var / n).sqrt()))
}
