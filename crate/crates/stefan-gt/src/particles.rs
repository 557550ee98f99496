//! Forward weighted-particle representation of the Euler scheme,
//! conditional on a given boundary path. Used as an independent oracle for
//! the boundary identity
//!
//!   (Λ_{mΔ}^d − Λ_{0−}^d)/d = [absorbed initial mass]
//!                             − [alive swept-injection mass]
//!                             − [alive boundary-emission mass at finite δ],
//!
//! and for the occupation-measure reading of u^Δ.
//!
//! Three populations: particles drawn from u(0−,·)·x^{d−1}; atoms of a
//! Poisson measure with intensity H·ν placed on each swept interval at the
//! step times; and a boundary-emission Poisson stream of rate
//! 2γδ^{−1}Λ^{d−2} whose particles start at (Λ + δU)∨0, U ~ Unif[−1,1].
//! All intensities are scaled by 1/w (w = initial mass / N) and every
//! particle carries weight w, which reproduces the identity's normalization
//! for any initial mass. Crossing is always relative to the side at birth.

use crate::boundary::BoundaryPath;
use crate::error::{Result, SimError};
use crate::pathsim::{run_against_barrier, PathOutcome, SubstepPolicy};
use crate::profile::TemperatureProfile;
use crate::quadrature::nu_h_integral;

use crate::rng::{stream, StreamKind};
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParticleKind {
    Initial,
    SweptInjection,
    BoundaryEmission,
}

#[derive(Debug, Clone, Copy)]
pub struct Particle {
    pub kind: ParticleKind,
    pub birth_time: f64,
    pub birth_pos: f64,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct ParticleEnsemble {
    pub particles: Vec<Particle>,
    /// Common weight = initial ν-mass / N.
    pub weight: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct EmissionConfig {
    /// Offset half-width δ > 0.
    pub delta: f64,
}

/// Outcome of one simulated particle, compressed for the identity estimate.
#[derive(Debug, Clone, Copy)]
struct Fate {
    kind: ParticleKind,
    birth_time: f64,
    weight: f64,
    /// Absorption time; NaN when the particle stayed alive to the horizon.
    death_time: f64,
    death_pos: f64,
    death_substep: f64,
}

#[derive(Debug, Clone)]
pub struct EvolveResult {
    pub delta_t: f64,
    pub horizon_steps: usize,
    fates: Vec<Fate>,
    /// Alive (position, weight) snapshots at each grid time mΔ, when requested.
    pub snapshots: Option<Vec<Vec<(f64, f64)>>>,
    /// Times the emission clamp (Λ + δU) ∨ 0 actually bound.
    pub clamp_count: u64,
}

/// Draw N particles from the density u0(x) x^{d-1}, weight (ν-mass)/N each.
pub fn init_ensemble(
    u0: &TemperatureProfile,
    n: usize,
    d: u32,
    seed: u64,
) -> Result<ParticleEnsemble> {
    let mass = u0.nu_mass(d);
    if !(mass > 0.0) {
        return Err(SimError::Domain("initial profile has zero nu-mass".into()));
    }
    if n == 0 {
        return Err(SimError::Config("need at least one particle".into()));
    }
    // cell-wise cumulative masses, then bisect the CDF inside one cell
    let k = u0.len() - 1;
    let mut cum = Vec::with_capacity(k + 1);
    cum.push(0.0);
    for j in 0..k {
        let a = u0.node(j);
        let b = u0.node(j + 1);
        cum.push(cum[j] + u0.nu_integral(a, b, d).unwrap());
    }
    let weight = mass / n as f64;
    let particles: Vec<Particle> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, StreamKind::InitialParticle, i as u64);
            let target = rng.random::<f64>() * mass;
            let j = match cum.binary_search_by(|c| c.partial_cmp(&target).unwrap()) {
                Ok(j) => j.min(k - 1),
                Err(j) => j.saturating_sub(1).min(k - 1),
            };
            let (mut lo, mut hi) = (u0.node(j), u0.node(j + 1));
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let c = cum[j] + u0.nu_integral(u0.node(j), mid, d).unwrap();
                if c < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Particle {
                kind: ParticleKind::Initial,
                birth_time: 0.0,
                birth_pos: 0.5 * (lo + hi),
                weight,
            }
        })
        .collect();
    Ok(ParticleEnsemble { particles, weight })
}

/// One Poisson stream drawing more events than this is a configuration
/// problem (tiny δ or a d=1 boundary collapsing to 0), not a workload.
const MAX_EVENT_MEAN: f64 = 5e7;

fn check_event_budget(mean: f64, what: &str) -> Result<()> {
    if mean > MAX_EVENT_MEAN {
        return Err(SimError::Config(format!(
            "{what} would draw ~{mean:.2e} particles in one step; raise delta / weight or shrink the horizon"
        )));
    }
    Ok(())
}

/// Sample from the density ∝ x^{d-2} on [a, b] (the H·ν injection law).
fn sample_h_position<R: Rng + ?Sized>(a: f64, b: f64, d: u32, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    if d == 1 {
        // density ∝ 1/x
        a * (b / a).powf(u)
    } else if d == 2 {
        a + u * (b - a)
    } else {
        let p = d as f64 - 1.0;
        (a.powf(p) + u * (b.powf(p) - a.powf(p))).powf(1.0 / p)
    }
}

struct Born {
    particle: Particle,
    /// Side of the barrier at birth.
    side: f64,
}

/// Simulate one particle against the piecewise-constant path from its birth
/// to the horizon, handling barrier moves at the step times (a particle
/// swallowed by a moving barrier dies exactly at that grid time).
fn simulate<R: Rng + ?Sized>(
    path: &BoundaryPath,
    d: u32,
    born: &Born,
    policy: SubstepPolicy,
    horizon_steps: usize,
    rng: &mut R,
    mut record: Option<&mut dyn FnMut(usize, f64)>,
) -> Fate {
    let delta = path.delta_t;
    let mut t = born.particle.birth_time;
    let mut pos = born.particle.birth_pos;
    let side = born.side;
    let mut dead = (f64::NAN, pos, 0.0);
    let mut alive = true;
    let mut m = (t / delta + 1e-9).floor() as usize;
    // a particle sitting at a grid time is first tested against the barrier
    // in force there (τ has the right-continuous barrier, so a barrier move
    // onto the particle kills it at exactly mΔ) and only then counts as
    // occupying that snapshot
    if (t - m as f64 * delta).abs() < 1e-12 * delta.max(1.0) {
        let lambda = path.radii[m.min(path.radii.len() - 1)];
        if (pos - lambda) * side < 0.0 {
            dead = (m as f64 * delta, pos, 0.0);
            alive = false;
        } else if let Some(rec) = record.as_deref_mut() {
            rec(m, pos);
        }
    }
    while alive && m < horizon_steps {
        let lambda = path.radii[m.min(path.radii.len() - 1)];
        let seg_end = (m + 1) as f64 * delta;
        match run_against_barrier(d, pos, side, lambda, seg_end - t, policy, rng) {
            PathOutcome::Crossed { time, pos: p, substep } => {
                dead = (t + time, p, substep);
                alive = false;
            }
            PathOutcome::Survived { pos: p } => {
                pos = p;
                t = seg_end;
                m += 1;
                let lambda_new = path.radii[m.min(path.radii.len() - 1)];
                if (pos - lambda_new) * side < 0.0 {
                    dead = (m as f64 * delta, pos, 0.0);
                    alive = false;
                } else if let Some(rec) = record.as_deref_mut() {
                    rec(m, pos);
                }
            }
        }
    }
    Fate {
        kind: born.particle.kind,
        birth_time: born.particle.birth_time,
        weight: born.particle.weight,
        death_time: if alive { f64::NAN } else { dead.0 },
        death_pos: dead.1,
        death_substep: dead.2,
    }
}

/// Evolve all populations against the path up to its final grid time (or to
/// complete melting, where the representation stops being asserted).
pub fn evolve_against(
    path: &BoundaryPath,
    ensemble: &ParticleEnsemble,
    d: u32,
    gamma: f64,
    emission: EmissionConfig,
    seed: u64,
    record_snapshots: bool,
) -> Result<EvolveResult> {
    if !(emission.delta > 0.0) {
        return Err(SimError::Config("emission delta must be > 0".into()));
    }
    let delta = path.delta_t;
    let w = ensemble.weight;
    let melt_step = path.radii.iter().position(|&r| r == 0.0).unwrap_or(path.radii.len());
    let horizon_steps = melt_step.min(path.radii.len()) - 1;
    let policy_bulk = SubstepPolicy::new(delta / 20.0, delta / 20.0 / 64.0);
    let policy_emit =
        SubstepPolicy::new(delta / 20.0, (emission.delta * emission.delta / 4.0).min(delta / 20.0));

    // births are drawn up front from dedicated streams so the particle set
    // is identical for any worker count
    let mut born: Vec<(Born, SubstepPolicy)> = Vec::new();
    let lambda0 = path.radii[0];
    for p in &ensemble.particles {
        let side = (p.birth_pos - lambda0).signum();
        born.push((Born { particle: *p, side }, policy_bulk));
    }

    // swept-interval injections at each step time m ≥ 1
    for m in 1..=horizon_steps {
        let (prev, cur) = (path.radii[m - 1], path.radii[m]);
        let (lo, hi) = (prev.min(cur), prev.max(cur));
        if hi - lo <= 0.0 {
            continue;
        }
        let mean = nu_h_integral(lo, hi, gamma, d) / w;
        if !mean.is_finite() {
            return Err(SimError::Domain(
                "injection intensity diverges (swept interval reaches 0 with d = 1)".into(),
            ));
        }
        check_event_budget(mean, "swept-interval injection")?;
        let mut rng = stream(seed, StreamKind::EventDraw, m as u64);
        let count = Poisson::new(mean.max(1e-300)).expect("positive mean").sample(&mut rng) as u64;
        for _ in 0..count {
            let pos = sample_h_position(lo, hi, d, &mut rng);
            let side = (pos - cur).signum();
            born.push((
                Born {
                    particle: Particle {
                        kind: ParticleKind::SweptInjection,
                        birth_time: m as f64 * delta,
                        birth_pos: pos,
                        weight: w,
                    },
                    side,
                },
                policy_bulk,
            ));
        }
    }

    // boundary-emission stream, rate 2γ δ^{-1} Λ^{d-2} per unit time
    let mut clamp_count = 0u64;
    for m in 0..horizon_steps {
        let lambda = path.radii[m];
        if lambda <= 0.0 {
            continue;
        }
        let rate = 2.0 * gamma / emission.delta * lambda.powi(d as i32 - 2);
        let mean = rate * delta / w;
        check_event_budget(mean, "boundary emission")?;
        let mut rng = stream(seed, StreamKind::EventDraw, 1_000_000 + m as u64);
        let count = Poisson::new(mean.max(1e-300)).expect("positive mean").sample(&mut rng) as u64;
        for _ in 0..count {
            let t_birth = (m as f64 + rng.random::<f64>()) * delta;
            let offset: f64 = 2.0 * rng.random::<f64>() - 1.0;
            let raw = lambda + emission.delta * offset;
            let pos = if raw < 0.0 {
                clamp_count += 1;
                0.0
            } else {
                raw
            };
            let side = (pos - lambda).signum();
            born.push((
                Born {
                    particle: Particle {
                        kind: ParticleKind::BoundaryEmission,
                        birth_time: t_birth,
                        birth_pos: pos,
                        weight: w,
                    },
                    side,
                },
                policy_emit,
            ));
        }
    }
    if clamp_count > 0 {
        log::warn!("emission clamp (Λ + δU) ∨ 0 bound {clamp_count} times (δ exceeds Λ somewhere)");
    }

    let snapshots_needed = record_snapshots;
    let results: Vec<(Fate, Option<Vec<(usize, f64)>>)> = born
        .par_iter()
        .enumerate()
        .map(|(i, (b, policy))| {
            let kind_stream = match b.particle.kind {
                ParticleKind::Initial => StreamKind::InitialParticle,
                ParticleKind::SweptInjection => StreamKind::InjectedParticle,
                ParticleKind::BoundaryEmission => StreamKind::EmittedParticle,
            };
            let mut rng = stream(seed ^ 0x5bd1_e995, kind_stream, i as u64);
            if snapshots_needed {
                let mut trace: Vec<(usize, f64)> = Vec::new();
                let mut rec = |m: usize, pos: f64| trace.push((m, pos));
                let fate =
                    simulate(path, d, b, *policy, horizon_steps, &mut rng, Some(&mut rec));
                (fate, Some(trace))
            } else {
                let fate = simulate(path, d, b, *policy, horizon_steps, &mut rng, None);
                (fate, None)
            }
        })
        .collect();

    let snapshots = if snapshots_needed {
        let mut snaps: Vec<Vec<(f64, f64)>> = vec![Vec::new(); horizon_steps + 1];
        for (fate, trace) in &results {
            if let Some(trace) = trace {
                for &(m, pos) in trace {
                    snaps[m].push((pos, fate.weight));
                }
            }
        }
        Some(snaps)
    } else {
        None
    };

    Ok(EvolveResult {
        delta_t: delta,
        horizon_steps,
        fates: results.into_iter().map(|(f, _)| f).collect(),
        snapshots,
        clamp_count,
    })
}

/// The identity's right-hand side at step m with a Poisson/multinomial
/// chunk bootstrap standard error (deterministic given the seed).
pub fn lambda_identity_estimate(result: &EvolveResult, m: usize, seed: u64) -> (f64, f64) {
    let t = m as f64 * result.delta_t;
    let tol = 1e-12 * result.delta_t;
    let contribution = |f: &Fate| -> f64 {
        let dead_by_t = !f.death_time.is_nan() && f.death_time <= t + tol;
        match f.kind {
            ParticleKind::Initial => {
                if dead_by_t {
                    f.weight
                } else {
                    0.0
                }
            }
            ParticleKind::SweptInjection | ParticleKind::BoundaryEmission => {
                if f.birth_time <= t + tol && !dead_by_t {
                    -f.weight
                } else {
                    0.0
                }
            }
        }
    };

    const CHUNKS: usize = 200;
    let mut chunk_sums = vec![0.0f64; CHUNKS];
    let mut per_kind_counts = [0usize; 3];
    for (i, f) in result.fates.iter().enumerate() {
        chunk_sums[i % CHUNKS] += contribution(f);
        per_kind_counts[f.kind as usize] += 1;
    }
    let estimate: f64 = chunk_sums.iter().sum();

    // chunk bootstrap: resample chunks with replacement, B = 200
    let mut rng = stream(seed, StreamKind::Generic, 0xb007_5712 + m as u64);
    const B: usize = 200;
    let mut reps = Vec::with_capacity(B);
    for _ in 0..B {
        let mut s = 0.0;
        for _ in 0..CHUNKS {
            s += chunk_sums[rng.random_range(0..CHUNKS)];
        }
        reps.push(s);
    }
    let mean = reps.iter().sum::<f64>() / B as f64;
    let var = reps.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (B - 1) as f64;
    (estimate, var.sqrt())
}

/// Kernel-density estimate of the alive occupation measure at grid step m,
/// divided by x^{d-1} (with reflection at the origin).
pub fn occupation_density(
    result: &EvolveResult,
    m: usize,
    grid_mesh: f64,
    x_max: f64,
    d: u32,
) -> Result<TemperatureProfile> {
    let snaps = result
        .snapshots
        .as_ref()
        .ok_or_else(|| SimError::Domain("evolve_against ran without snapshots".into()))?;
    let snap = snaps
        .get(m)
        .ok_or_else(|| SimError::Domain(format!("no snapshot at step {m}")))?;
    let bw = 2.0 * grid_mesh;
    let k = (x_max / grid_mesh).round() as usize;
    let norm = 1.0 / (bw * (2.0 * std::f64::consts::PI).sqrt());
    let kernel = |z: f64| norm * (-z * z / (2.0 * bw * bw)).exp();
    let values: Vec<f64> = (0..=k)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 * grid_mesh;
            let mut acc = 0.0;
            for &(p, w) in snap {
                if (p - x).abs() < 8.0 * bw {
                    acc += w * kernel(p - x);
                }
                if (p + x).abs() < 8.0 * bw {
                    acc += w * kernel(p + x);
                }
            }
            if i == 0 {
                f64::NAN // filled below from the first interior node
            } else {
                acc / x.powi(d as i32 - 1)
            }
        })
        .collect();
    let mut values = values;
    values[0] = values[1];
    TemperatureProfile::new(grid_mesh, values)
}

/// Total weight bookkeeping: alive + absorbed equals initial + injected +
/// emitted exactly (weights never change during a particle's life).
pub fn weight_conservation(result: &EvolveResult) -> (f64, f64) {
    let total: f64 = result.fates.iter().map(|f| f.weight).sum();
    let alive: f64 =
        result.fates.iter().filter(|f| f.death_time.is_nan()).map(|f| f.weight).sum();
    let absorbed: f64 =
        result.fates.iter().filter(|f| !f.death_time.is_nan()).map(|f| f.weight).sum();
    (total, alive + absorbed)
}

/// Worst distance from the barrier at the recorded crossings, in units of
/// √(substep) (sign-flip detections overshoot by a Gaussian increment).
pub fn max_crossing_overshoot(result: &EvolveResult, path: &BoundaryPath) -> f64 {
    result
        .fates
        .iter()
        .filter(|f| !f.death_time.is_nan() && f.death_substep > 0.0)
        .map(|f| {
            // substeps never straddle grid times, so mid-substep lookup sees
            // the barrier the crossing was actually detected against
            let lambda = path.value_at(f.death_time - 0.5 * f.death_substep);
            (f.death_pos - lambda).abs() / f.death_substep.sqrt()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn indicator_profile(h: f64, x_max: f64, b: f64) -> TemperatureProfile {
        let k = (x_max / h).round() as usize;
        let values =
            (0..=k).map(|i| if i as f64 * h <= b { 1.0 } else { 0.0 }).collect();
        TemperatureProfile::new(h, values).unwrap()
    }

    #[test]
    fn init_matches_analytic_moment() {
        // u0 = 1_{[0,0.81]}, d=3: E[X] = 3/4 · 0.81 = 0.6075
        let u0 = indicator_profile(0.005, 2.0, 0.81);
        let n = 200_000;
        let ens = init_ensemble(&u0, n, 3, 9).unwrap();
        let mean: f64 =
            ens.particles.iter().map(|p| p.birth_pos).sum::<f64>() / n as f64;
        // Var(X) for density 3x²/0.81³ on [0, 0.81]: E[X²] = 3/5·0.81²
        let var = 0.6 * 0.81f64.powi(2) - 0.6075f64.powi(2);
        let sigma = (var / n as f64).sqrt();
        assert!((mean - 0.6075).abs() < 3.0 * sigma + 2e-3, "mean {mean}");
        // total weight = nu-mass exactly
        let total: f64 = ens.particles.iter().map(|p| p.weight).sum();
        assert!((total - u0.nu_mass(3)).abs() < 1e-9);
    }

    #[test]
    fn init_concentrates_on_narrow_bump() {
        let h = 0.005;
        let k = (2.0f64 / h).round() as usize;
        let values: Vec<f64> = (0..=k)
            .map(|i| {
                let x = i as f64 * h;
                (-(x - 1.0) * (x - 1.0) / 1e-4).exp()
            })
            .collect();
        let u0 = TemperatureProfile::new(h, values).unwrap();
        let ens = init_ensemble(&u0, 2000, 3, 10).unwrap();
        for p in &ens.particles {
            assert!((p.birth_pos - 1.0).abs() < 0.1, "stray particle at {}", p.birth_pos);
        }
    }

    #[test]
    fn zero_mass_rejected() {
        let u0 = indicator_profile(0.01, 1.0, -1.0);
        assert!(init_ensemble(&u0, 100, 3, 0).is_err());
    }

    #[test]
    fn injection_counts_match_h_nu_mass() {
        // swept [0.5, 0.7], d=3, γ=1: injected mass mean = (0.7²−0.5²)/2 = 0.12
        let path = BoundaryPath { delta_t: 0.01, radii: vec![0.7, 0.5, 0.5], jumps: vec![] };
        let u0 = indicator_profile(0.005, 2.0, 0.81);
        let n = 50_000;
        let ens = init_ensemble(&u0, n, 3, 11).unwrap();
        let res = evolve_against(
            &path,
            &ens,
            3,
            1.0,
            EmissionConfig { delta: 0.01 },
            12,
            false,
        )
        .unwrap();
        let injected: f64 = res
            .fates
            .iter()
            .filter(|f| f.kind == ParticleKind::SweptInjection)
            .map(|f| f.weight)
            .sum();
        let w = ens.weight;
        let sigma = (0.12f64 * w).sqrt(); // Poisson mass fluctuation
        assert!((injected - 0.12).abs() < 4.0 * sigma, "injected {injected}");
    }

    #[test]
    fn emission_rate_matches_formula() {
        // d=3, γ=1, δ=0.01, Λ=0.5 → 2·0.5/0.01 = 100 events per unit time
        // (per unit weight); over T=0.02 with weight w: mean count 2/w
        let path = BoundaryPath { delta_t: 0.01, radii: vec![0.5, 0.5, 0.5], jumps: vec![] };
        let u0 = indicator_profile(0.005, 2.0, 0.81);
        let ens = init_ensemble(&u0, 20_000, 3, 13).unwrap();
        let res = evolve_against(
            &path,
            &ens,
            3,
            1.0,
            EmissionConfig { delta: 0.01 },
            14,
            false,
        )
        .unwrap();
        let emitted_mass: f64 = res
            .fates
            .iter()
            .filter(|f| f.kind == ParticleKind::BoundaryEmission)
            .map(|f| f.weight)
            .sum();
        let expected = 100.0 * 0.02; // rate × horizon, in mass units
        let sigma = (expected * ens.weight).sqrt();
        assert!(
            (emitted_mass - expected).abs() < 4.0 * sigma,
            "emitted mass {emitted_mass} vs {expected}"
        );
    }

    #[test]
    fn constant_boundary_has_no_injections() {
        let path = BoundaryPath { delta_t: 0.01, radii: vec![0.9; 4], jumps: vec![] };
        let u0 = indicator_profile(0.005, 2.0, 0.81);
        let ens = init_ensemble(&u0, 5_000, 3, 15).unwrap();
        let res = evolve_against(
            &path,
            &ens,
            3,
            1.0,
            EmissionConfig { delta: 0.02 },
            16,
            false,
        )
        .unwrap();
        assert!(res.fates.iter().all(|f| f.kind != ParticleKind::SweptInjection));
        let (lhs, rhs) = weight_conservation(&res);
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn identity_estimate_is_zero_at_time_zero() {
        let path = BoundaryPath { delta_t: 0.01, radii: vec![0.9; 3], jumps: vec![] };
        let u0 = indicator_profile(0.005, 2.0, 0.81);
        let ens = init_ensemble(&u0, 5_000, 3, 17).unwrap();
        let res = evolve_against(
            &path,
            &ens,
            3,
            1.0,
            EmissionConfig { delta: 0.02 },
            18,
            false,
        )
        .unwrap();
        let (est, se) = lambda_identity_estimate(&res, 0, 19);
        assert_eq!(est, 0.0);
        assert!(se >= 0.0);
    }

    #[test]
    fn near_zero_intensity_gives_near_zero_estimate() {
        // tiny γ: essentially no emissions/injections, and a far barrier:
        // estimate ≈ 0 at every step
        let path = BoundaryPath { delta_t: 0.005, radii: vec![1.8; 5], jumps: vec![] };
        let u0 = indicator_profile(0.005, 3.0, 0.3);
        let ens = init_ensemble(&u0, 20_000, 3, 20).unwrap();
        let res = evolve_against(
            &path,
            &ens,
            3,
            1e-6,
            EmissionConfig { delta: 0.02 },
            21,
            false,
        )
        .unwrap();
        for m in 0..=4 {
            let (est, se) = lambda_identity_estimate(&res, m, 22);
            assert!(est.abs() < 3.0 * se + 1e-4, "m={m}: {est} ± {se}");
        }
    }

    #[test]
    fn occupation_density_recovers_initial_profile() {
        let h = 0.005;
        let u0 = indicator_profile(h, 2.0, 0.81);
        let path = BoundaryPath { delta_t: 0.01, radii: vec![0.9, 0.9], jumps: vec![] };
        let ens = init_ensemble(&u0, 400_000, 3, 23).unwrap();
        let res = evolve_against(
            &path,
            &ens,
            3,
            1e-6,
            EmissionConfig { delta: 0.02 },
            24,
            true,
        )
        .unwrap();
        let est = occupation_density(&res, 0, h, 2.0, 3).unwrap();
        // interior plateau nodes: KDE bias + MC noise well inside the support
        for &x in &[0.2, 0.4, 0.6] {
            assert!((est.value_at(x) - 1.0).abs() < 0.05, "x={x}: {}", est.value_at(x));
        }
        assert!(est.value_at(1.5) < 0.05);
    }

    #[test]
    fn occupation_density_after_one_step_matches_heatstep() {
        // constant boundary, one step: the alive occupation measure is the
        // frozen-boundary expectation; the images backend is the oracle
        use crate::heatstep::{step_frozen, FrozenStepRequest};
        let h = 0.01;
        let (d, gamma, lambda, dt) = (3u32, 1.0, 0.9, 0.01);
        let u0 = indicator_profile(h, 3.0, 0.81);
        let path = BoundaryPath { delta_t: dt, radii: vec![lambda, lambda], jumps: vec![] };
        let ens = init_ensemble(&u0, 400_000, d, 27).unwrap();
        // tiny gamma: no injections/emissions, pure absorbed diffusion
        let res = evolve_against(
            &path,
            &ens,
            d,
            1e-12,
            EmissionConfig { delta: 0.02 },
            28,
            true,
        )
        .unwrap();
        let est = occupation_density(&res, 1, h, 3.0, d).unwrap();
        let mut req = FrozenStepRequest::new(&u0, lambda, dt, d, gamma);
        req.backend = crate::config::Backend::Images;
        let oracle = step_frozen(&req).unwrap();
        // the oracle pays H(λ) on crossing; the particle system only loses
        // the crossers, so compare where the crossing payoff is negligible:
        // interior points away from the boundary and the freeze kink
        for &x in &[0.3, 0.5, 0.65] {
            let got = est.value_at(x);
            let want = oracle.value_at(x);
            assert!((got - want).abs() < 0.05, "x={x}: particles {got} vs heatstep {want}");
        }
    }

    #[test]
    fn occupation_density_is_gibbs_thomson_on_fresh_swept_interval() {
        // boundary jumps 0.9 → 0.6 at step 1: the injected atoms put mass
        // H(x)·ν on (0.6, 0.9) at that instant
        let h = 0.005;
        let d = 3u32;
        let u0 = indicator_profile(h, 3.0, 0.81);
        let path = BoundaryPath { delta_t: 0.01, radii: vec![0.9, 0.6], jumps: vec![] };
        let ens = init_ensemble(&u0, 200_000, d, 29).unwrap();
        let res = evolve_against(
            &path,
            &ens,
            d,
            1.0,
            EmissionConfig { delta: 0.01 },
            30,
            true,
        )
        .unwrap();
        let est = occupation_density(&res, 1, h, 3.0, d).unwrap();
        for &x in &[0.7, 0.75, 0.8] {
            let want = 1.0 / x; // H(x), γ = 1
            let got = est.value_at(x);
            assert!(
                (got - want).abs() < 0.12,
                "x={x}: occupation {got} vs H {want} (KDE + finite-δ slack)"
            );
        }
        // survivors below the new boundary keep the initial plateau
        assert!((est.value_at(0.3) - 1.0).abs() < 0.08);
    }

    #[test]
    fn crossings_hug_the_barrier() {
        let path = BoundaryPath { delta_t: 0.01, radii: vec![0.9, 0.8, 0.7], jumps: vec![] };
        let u0 = indicator_profile(0.005, 2.0, 0.81);
        let ens = init_ensemble(&u0, 20_000, 3, 25).unwrap();
        let res = evolve_against(
            &path,
            &ens,
            3,
            1.0,
            EmissionConfig { delta: 0.02 },
            26,
            false,
        )
        .unwrap();
        // sign-flip overshoot is a one-substep Gaussian increment
        assert!(max_crossing_overshoot(&res, &path) < 8.0);
    }
}

