//! Command-line runner: scheme runs with CSV/SVG emission, particle
//! cross-validation against an existing boundary file, physicality checks,
//! and plotting. Exit codes: 0 success, 1 configuration error, 2 violated
//! runtime invariant.

mod config_text;
mod outputs;
mod svg;

use clap::{Parser, Subcommand};
use config_text::CliConfig;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::time::Instant;
use stefan_gt::error::SimError;
use stefan_gt::particles::{
    evolve_against, init_ensemble, lambda_identity_estimate, EmissionConfig,
};
use stefan_gt::physicality::{verify_trajectory, Verdict};
use stefan_gt::euler;

#[derive(Parser)]
#[command(name = "stefan-gt", version, about = "Radially symmetric Stefan problem with surface tension: implicit Euler scheme, particle cross-validation, physicality checks")]
struct Cli {
    /// Worker threads (default: all cores; STEFAN_GT_THREADS as fallback)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct ConfigArgs {
    /// Flat key=value config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in parameter set: figure1 | fast
    #[arg(long)]
    preset: Option<String>,
    /// RNG seed override
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the implicit Euler scheme; emit lambda.csv, profiles/, audit.csv,
    /// physicality.csv, lambda.svg and a manifest
    RunEuler {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evolve the forward particle system against a boundary file and report
    /// the identity comparison
    RunParticles {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// lambda.csv produced by run-euler
        #[arg(long)]
        boundary: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Particle count override
        #[arg(long)]
        particles: Option<usize>,
        /// Emission offset half-width override
        #[arg(long)]
        emission_delta: Option<f64>,
    },
    /// Re-run the scheme and classify every detected jump
    CheckPhysicality {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a lambda.csv as an SVG staircase plot
    Plot {
        input: PathBuf,
        output: PathBuf,
    },
}

fn load_config(args: &ConfigArgs) -> Result<CliConfig, SimError> {
    let base = match &args.preset {
        Some(name) => config_text::preset(name)?,
        None => config_text::preset("figure1")?,
    };
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| SimError::Config(format!("cannot read {}: {e}", path.display())))?;
            config_text::parse_config(&text, base)?
        }
        None => {
            if args.preset.is_none() {
                return Err(SimError::Config("need --config or --preset".into()));
            }
            base
        }
    };
    if let Some(seed) = args.seed {
        cfg.sim.seed = seed;
    }
    Ok(cfg)
}

fn exit_code(err: &SimError) -> i32 {
    match err {
        SimError::Invariant(_) => 2,
        _ => 1,
    }
}

fn run_euler(cfg: &CliConfig, out: &Path) -> Result<(), SimError> {
    let started = Instant::now();
    std::fs::create_dir_all(out.join("profiles"))
        .map_err(|e| SimError::Config(format!("cannot create {}: {e}", out.display())))?;
    let res = euler::run(&cfg.sim)?;
    let reports = verify_trajectory(&res, cfg.sim.d, cfg.sim.gamma, 2.0 * cfg.sim.mesh)?;

    let mut files = vec!["lambda.csv".to_string(), "audit.csv".into(), "physicality.csv".into(), "lambda.svg".into()];
    outputs::write_atomic(&out.join("lambda.csv"), &outputs::lambda_csv(&res.path))?;
    outputs::write_atomic(&out.join("audit.csv"), &outputs::audit_csv(&res))?;
    outputs::write_atomic(&out.join("physicality.csv"), &outputs::physicality_csv(&reports))?;
    outputs::write_atomic(&out.join("lambda.svg"), &svg::render(&res.path, 0.0))?;

    // profile snapshots: configured times plus both sides of every jump
    let mesh = cfg.sim.mesh;
    let mut snapshot_steps: Vec<(usize, &str)> = Vec::new();
    for &t in &cfg.snapshot_times {
        let m = (t / cfg.sim.delta_t).round() as usize;
        snapshot_steps.push((m, "u"));
    }
    for j in &res.path.jumps {
        snapshot_steps.push((j.step + 1, "jump"));
    }
    for (m, label) in snapshot_steps {
        let t = m as f64 * cfg.sim.delta_t;
        let (profile, tag): (&[f64], &str) = if m == 0 {
            (res.u0.values(), "u")
        } else if let Some(step) = res.steps.get(m - 1) {
            if label == "jump" {
                // pre-jump profile first, post-freeze below
                let name = outputs::profile_filename(&out.join("profiles"), "pre", t);
                outputs::write_atomic(&name, &outputs::profile_csv(t, mesh, step.pre.values()))?;
                files.push(format!("profiles/{}", name.file_name().unwrap().to_string_lossy()));
                (step.post.values(), "post")
            } else {
                (step.post.values(), "u")
            }
        } else {
            continue;
        };
        let name = outputs::profile_filename(&out.join("profiles"), tag, t);
        outputs::write_atomic(&name, &outputs::profile_csv(t, mesh, profile))?;
        files.push(format!("profiles/{}", name.file_name().unwrap().to_string_lossy()));
    }

    let mut verdict_counts = std::collections::BTreeMap::new();
    for r in &reports {
        *verdict_counts.entry(r.verdict.to_string()).or_insert(0u64) += 1;
    }
    let manifest = json!({
        "config": config_text::echo(cfg),
        "seed": cfg.sim.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "wall_clock_seconds": started.elapsed().as_secs_f64(),
        "outputs": files,
        "audit": {
            "max_residual_excl_melt": res.audit.max_residual_excl_melt(),
            "melt_time": res.path.melt_time(),
            "sigma": res.sigma,
        },
        "physicality": verdict_counts,
        "jumps": res.path.jumps.len(),
    });
    outputs::write_atomic(&out.join("manifest.json"), &format!("{manifest:#}\n"))?;
    println!(
        "run-euler: {} steps, {} jumps, max residual {:.3e}, outputs in {}",
        res.steps.len(),
        res.path.jumps.len(),
        res.audit.max_residual_excl_melt(),
        out.display()
    );
    Ok(())
}

fn run_particles(
    cfg: &CliConfig,
    boundary: &Path,
    out: &Path,
    particles: usize,
    emission_delta: f64,
) -> Result<(), SimError> {
    let started = Instant::now();
    if particles == 0 {
        return Err(SimError::Config("particle count must be positive".into()));
    }
    std::fs::create_dir_all(out)
        .map_err(|e| SimError::Config(format!("cannot create {}: {e}", out.display())))?;
    let text = std::fs::read_to_string(boundary)
        .map_err(|e| SimError::Config(format!("cannot read {}: {e}", boundary.display())))?;
    let path = outputs::parse_lambda_csv(&text)?;
    if (path.delta_t - cfg.sim.delta_t).abs() > 1e-9 * cfg.sim.delta_t {
        return Err(SimError::Config(format!(
            "boundary grid delta_t={} does not match config delta_t={}",
            path.delta_t, cfg.sim.delta_t
        )));
    }
    let u0 = cfg.sim.validate()?;
    let ens = init_ensemble(&u0, particles, cfg.sim.d, cfg.sim.seed)?;
    let ev = evolve_against(
        &path,
        &ens,
        cfg.sim.d,
        cfg.sim.gamma,
        EmissionConfig { delta: emission_delta },
        cfg.sim.seed ^ 0xfeed,
        false,
    )?;
    let mut csv = String::from("m,t,euler_lhs,estimate,stderr,diff\n");
    let d = cfg.sim.d as i32;
    let mut max_abs_diff = 0.0f64;
    for m in 0..=ev.horizon_steps {
        let (est, se) = lambda_identity_estimate(&ev, m, cfg.sim.seed ^ 0xb00);
        let lhs = (path.radii[m].powi(d) - path.radii[0].powi(d)) / d as f64;
        max_abs_diff = max_abs_diff.max((est - lhs).abs());
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            m,
            outputs::fmt(m as f64 * path.delta_t),
            outputs::fmt(lhs),
            outputs::fmt(est),
            outputs::fmt(se),
            outputs::fmt(est - lhs)
        ));
    }
    outputs::write_atomic(&out.join("identity.csv"), &csv)?;
    let manifest = json!({
        "config": config_text::echo(cfg),
        "seed": cfg.sim.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "wall_clock_seconds": started.elapsed().as_secs_f64(),
        "boundary": boundary.display().to_string(),
        "particles": particles,
        "emission_delta": emission_delta,
        "emission_clamp_count": ev.clamp_count,
        "max_abs_identity_diff": max_abs_diff,
        "outputs": ["identity.csv"],
    });
    outputs::write_atomic(&out.join("manifest.json"), &format!("{manifest:#}\n"))?;
    println!(
        "run-particles: {} particles over {} steps, max |identity diff| {:.4e}, outputs in {}",
        particles,
        ev.horizon_steps,
        max_abs_diff,
        out.display()
    );
    Ok(())
}

fn check_physicality(cfg: &CliConfig, out: &Path) -> Result<(), SimError> {
    std::fs::create_dir_all(out)
        .map_err(|e| SimError::Config(format!("cannot create {}: {e}", out.display())))?;
    let res = euler::run(&cfg.sim)?;
    let reports = verify_trajectory(&res, cfg.sim.d, cfg.sim.gamma, 2.0 * cfg.sim.mesh)?;
    outputs::write_atomic(&out.join("physicality.csv"), &outputs::physicality_csv(&reports))?;
    for r in &reports {
        println!(
            "t={:.6} drop={:.6} lower={:.6} relaxed={:.6} upper={:.6} verdict={}",
            r.time,
            r.drop(),
            r.lower_bound,
            r.lower_bound_relaxed,
            r.upper_bound,
            r.verdict
        );
    }
    let upward = reports.iter().filter(|r| r.lambda_after > r.lambda_before).count();
    println!(
        "check-physicality: {} jumps, {} upward, verdicts written to {}",
        reports.len(),
        upward,
        out.join("physicality.csv").display()
    );
    // upward jumps beyond the cap are assertion-grade: the scheme exhibits none
    if reports
        .iter()
        .any(|r| r.lambda_after > r.lambda_before && r.verdict == Verdict::SuperPhysical)
    {
        return Err(SimError::Invariant("upward jump beyond the admissible cap".into()));
    }
    Ok(())
}

fn plot(input: &Path, output: &Path) -> Result<(), SimError> {
    let text = std::fs::read_to_string(input)
        .map_err(|e| SimError::Config(format!("cannot read {}: {e}", input.display())))?;
    let mut path = outputs::parse_lambda_csv(&text)?;
    path.jumps = euler::detect_jumps(&path, 0.0, 0.0);
    outputs::write_atomic(output, &svg::render(&path, 0.0))?;
    println!("plot: wrote {}", output.display());
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var("STEFAN_GT_THREADS").ok().and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: could not set thread pool size: {e}");
        }
    }
    let result = match &cli.command {
        Command::RunEuler { cfg, out } => load_config(cfg).and_then(|c| run_euler(&c, out)),
        Command::RunParticles { cfg, boundary, out, particles, emission_delta } => {
            load_config(cfg).and_then(|c| {
                let n = particles.unwrap_or(c.particles);
                let delta = emission_delta.unwrap_or(c.emission_delta);
                run_particles(&c, boundary, out, n, delta)
            })
        }
        Command::CheckPhysicality { cfg, out } => {
            load_config(cfg).and_then(|c| check_physicality(&c, out))
        }
        Command::Plot { input, output } => plot(input, output),
    };
    if let Err(err) = result {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}
