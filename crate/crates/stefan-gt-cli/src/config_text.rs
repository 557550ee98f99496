//! Flat text configuration: one `key = value` per line, `#` comments.
//! The initial profile is a named shape: `indicator a b [height]`,
//! `exponential c alpha`, or `table <csv path>`.

use stefan_gt::config::{Backend, HorizonKind, InitialData, SimConfig};
use stefan_gt::error::{Result, SimError};

#[derive(Debug, Clone)]
pub struct CliConfig {
    pub sim: SimConfig,
    /// run-particles: particle count.
    pub particles: usize,
    /// run-particles: emission offset half-width δ.
    pub emission_delta: f64,
    /// profile snapshot times for run-euler output.
    pub snapshot_times: Vec<f64>,
}

pub fn preset(name: &str) -> Result<CliConfig> {
    match name {
        // desk-scale variant of the headline scenario; the caption-scale
        // fidelity settings are delta_t=5e-4, mesh=3e-3
        "figure1" => Ok(CliConfig {
            sim: SimConfig {
                d: 3,
                gamma: 1.0,
                delta_t: 2e-3,
                mesh: 5e-3,
                x_max: 7.0,
                horizon: 1.0,
                lambda_init: 0.9,
                u_init: InitialData::Indicator { a: 0.0, b: 0.81, height: 1.0 },
                backend: Backend::FiniteDifference,
                horizon_kind: HorizonKind::Deterministic,
                seed: 42,
                normalize_mass: false,
            },
            particles: 200_000,
            emission_delta: 0.02,
            snapshot_times: vec![0.0, 0.01, 0.02, 0.05, 0.1],
        }),
        "fast" => Ok(CliConfig {
            sim: SimConfig {
                d: 3,
                gamma: 1.0,
                delta_t: 4e-3,
                mesh: 1e-2,
                x_max: 2.5,
                horizon: 0.05,
                lambda_init: 0.9,
                u_init: InitialData::Indicator { a: 0.0, b: 0.81, height: 1.0 },
                backend: Backend::FiniteDifference,
                horizon_kind: HorizonKind::Deterministic,
                seed: 42,
                normalize_mass: false,
            },
            particles: 20_000,
            emission_delta: 0.02,
            snapshot_times: vec![0.0, 0.02],
        }),
        other => Err(SimError::Config(format!(
            "unknown preset '{other}' (available: figure1, fast)"
        ))),
    }
}

fn parse_u_init(value: &str) -> Result<InitialData> {
    let parts: Vec<&str> = value.split_whitespace().collect();
    let bad = |msg: &str| SimError::Config(format!("u_init '{value}': {msg}"));
    match parts.first().copied() {
        Some("indicator") => {
            if parts.len() < 3 || parts.len() > 4 {
                return Err(bad("expected 'indicator a b [height]'"));
            }
            let a: f64 = parts[1].parse().map_err(|_| bad("bad a"))?;
            let b: f64 = parts[2].parse().map_err(|_| bad("bad b"))?;
            let height: f64 =
                if parts.len() == 4 { parts[3].parse().map_err(|_| bad("bad height"))? } else { 1.0 };
            Ok(InitialData::Indicator { a, b, height })
        }
        Some("exponential") => {
            if parts.len() != 3 {
                return Err(bad("expected 'exponential c alpha'"));
            }
            let c: f64 = parts[1].parse().map_err(|_| bad("bad c"))?;
            let alpha: f64 = parts[2].parse().map_err(|_| bad("bad alpha"))?;
            Ok(InitialData::Exponential { c, alpha })
        }
        Some("table") => {
            if parts.len() != 2 {
                return Err(bad("expected 'table <csv path>'"));
            }
            let text = std::fs::read_to_string(parts[1])
                .map_err(|e| bad(&format!("cannot read table: {e}")))?;
            let mut values = Vec::new();
            for line in text.lines().skip(1) {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let v = line
                    .rsplit(',')
                    .next()
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| bad(&format!("bad table row '{line}'")))?;
                values.push(v);
            }
            Ok(InitialData::Table(values))
        }
        _ => Err(bad("expected indicator | exponential | table")),
    }
}

pub fn apply_line(cfg: &mut CliConfig, key: &str, value: &str) -> Result<()> {
    let bad = |msg: String| SimError::Config(msg);
    let parse_f64 = |v: &str, k: &str| -> Result<f64> {
        v.parse().map_err(|_| bad(format!("key '{k}': bad number '{v}'")))
    };
    match key {
        "d" => cfg.sim.d = value.parse().map_err(|_| bad(format!("bad d '{value}'")))?,
        "gamma" => cfg.sim.gamma = parse_f64(value, key)?,
        "delta_t" => cfg.sim.delta_t = parse_f64(value, key)?,
        "mesh" => cfg.sim.mesh = parse_f64(value, key)?,
        "x_max" => cfg.sim.x_max = parse_f64(value, key)?,
        "horizon" => cfg.sim.horizon = parse_f64(value, key)?,
        "lambda_init" => cfg.sim.lambda_init = parse_f64(value, key)?,
        "u_init" => cfg.sim.u_init = parse_u_init(value)?,
        "backend" => {
            cfg.sim.backend = match value {
                "images" => Backend::Images,
                "finite-difference" => Backend::FiniteDifference,
                "monte-carlo" => Backend::MonteCarlo,
                other => return Err(bad(format!("unknown backend '{other}'"))),
            }
        }
        "horizon_kind" => {
            cfg.sim.horizon_kind = match value {
                "deterministic" => HorizonKind::Deterministic,
                "exponential" => HorizonKind::Exponential,
                other => return Err(bad(format!("unknown horizon_kind '{other}'"))),
            }
        }
        "seed" => cfg.sim.seed = value.parse().map_err(|_| bad(format!("bad seed '{value}'")))?,
        "normalize_mass" => {
            cfg.sim.normalize_mass =
                value.parse().map_err(|_| bad(format!("bad normalize_mass '{value}'")))?
        }
        "particles" => {
            cfg.particles = value.parse().map_err(|_| bad(format!("bad particles '{value}'")))?
        }
        "emission_delta" => cfg.emission_delta = parse_f64(value, key)?,
        "snapshot_times" => {
            cfg.snapshot_times = value
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad(format!("bad snapshot_times '{value}'")))?
        }
        other => return Err(bad(format!("unknown config key '{other}'"))),
    }
    Ok(())
}

pub fn parse_config(text: &str, base: CliConfig) -> Result<CliConfig> {
    let mut cfg = base;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            SimError::Config(format!("line {}: expected 'key = value', got '{line}'", lineno + 1))
        })?;
        apply_line(&mut cfg, key.trim(), value.trim())?;
    }
    Ok(cfg)
}

/// Echo of the effective configuration, diff-friendly.
pub fn echo(cfg: &CliConfig) -> String {
    let u_init = match &cfg.sim.u_init {
        InitialData::Indicator { a, b, height } => format!("indicator {a} {b} {height}"),
        InitialData::Exponential { c, alpha } => format!("exponential {c} {alpha}"),
        InitialData::Table(v) => format!("table ({} values)", v.len()),
    };
    let backend = match cfg.sim.backend {
        Backend::Images => "images",
        Backend::FiniteDifference => "finite-difference",
        Backend::MonteCarlo => "monte-carlo",
    };
    let horizon_kind = match cfg.sim.horizon_kind {
        HorizonKind::Deterministic => "deterministic",
        HorizonKind::Exponential => "exponential",
    };
    format!(
        "d = {}\ngamma = {}\ndelta_t = {}\nmesh = {}\nx_max = {}\nhorizon = {}\nlambda_init = {}\nu_init = {}\nbackend = {}\nhorizon_kind = {}\nseed = {}\nnormalize_mass = {}\nparticles = {}\nemission_delta = {}\n",
        cfg.sim.d,
        cfg.sim.gamma,
        cfg.sim.delta_t,
        cfg.sim.mesh,
        cfg.sim.x_max,
        cfg.sim.horizon,
        cfg.sim.lambda_init,
        u_init,
        backend,
        horizon_kind,
        cfg.sim.seed,
        cfg.sim.normalize_mass,
        cfg.particles,
        cfg.emission_delta,
    )
}
