//! Monte Carlo backend: per-node backward simulation of the frozen-boundary
//! expectation, parallel over nodes with one RNG stream per node.

use crate::boundary::gibbs_thomson;
use crate::config::HorizonKind;
use crate::error::{Result, SimError};
use crate::pathsim::{run_against_barrier, PathOutcome, SubstepPolicy};
use crate::profile::TemperatureProfile;
use crate::rng::{stream, StreamKind};
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

#[allow(clippy::too_many_arguments)]
pub fn step_frozen_mc(
    u: &TemperatureProfile,
    lambda: f64,
    dt: f64,
    d: u32,
    gamma: f64,
    horizon_kind: HorizonKind,
    seed: u64,
    paths: usize,
) -> Result<TemperatureProfile> {
    if paths == 0 {
        return Err(SimError::Config("monte-carlo backend needs at least one path".into()));
    }
    let hval = gibbs_thomson(lambda, gamma);
    let policy = SubstepPolicy::new(dt / 20.0, dt / 1280.0);
    let exp_law = Exp::new(1.0 / dt).expect("dt > 0");
    let grid = u.grid();
    let values: Vec<f64> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            if i == u.len() - 1 {
                return 0.0;
            }
            if (x - lambda).abs() < 1e-14 {
                return hval;
            }
            let side = if x > lambda { 1.0 } else { -1.0 };
            let mut rng = stream(seed, StreamKind::McNode, i as u64);
            let mut acc = 0.0;
            for _ in 0..paths {
                let horizon = match horizon_kind {
                    HorizonKind::Deterministic => dt,
                    HorizonKind::Exponential => exp_law.sample(&mut rng),
                };
                acc += match run_against_barrier(d, x, side, lambda, horizon, policy, &mut rng) {
                    PathOutcome::Crossed { .. } => hval,
                    PathOutcome::Survived { pos } => u.value_at(pos),
                };
            }
            acc / paths as f64
        })
        .collect();
    TemperatureProfile::new(u.mesh(), values)
}
