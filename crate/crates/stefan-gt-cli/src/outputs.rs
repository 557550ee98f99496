//! CSV emission with fixed schemas and atomic writes. All floating-point
//! fields are printed with 17 significant digits so re-parsing is bit-exact
//! and reruns are byte-identical.

use std::io::Write;
use std::path::{Path, PathBuf};

use stefan_gt::boundary::BoundaryPath;
use stefan_gt::error::{Result, SimError};
use stefan_gt::euler::RunResult;
use stefan_gt::physicality::JumpReport;

pub fn fmt(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{v:.16e}")
}

/// Write via a temporary file and rename, so readers never see partial files.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let io = |e: std::io::Error| SimError::Config(format!("writing {}: {e}", path.display()));
    {
        let mut f = std::fs::File::create(&tmp).map_err(io)?;
        f.write_all(contents.as_bytes()).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    std::fs::rename(&tmp, path).map_err(io)?;
    Ok(())
}

pub fn lambda_csv(path: &BoundaryPath) -> String {
    let mut out = String::from("t,lambda\n");
    for (t, r) in path.times().iter().zip(&path.radii) {
        out.push_str(&fmt(*t));
        out.push(',');
        out.push_str(&fmt(*r));
        out.push('\n');
    }
    out
}

pub fn parse_lambda_csv(text: &str) -> Result<BoundaryPath> {
    let mut times = Vec::new();
    let mut radii = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line.trim() != "t,lambda" {
                return Err(SimError::Config(format!("bad lambda.csv header '{line}'")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (t, r) = line
            .split_once(',')
            .ok_or_else(|| SimError::Config(format!("bad lambda.csv row '{line}'")))?;
        times.push(
            t.trim().parse::<f64>().map_err(|_| SimError::Config(format!("bad t '{t}'")))?,
        );
        radii.push(
            r.trim().parse::<f64>().map_err(|_| SimError::Config(format!("bad lambda '{r}'")))?,
        );
    }
    if times.len() < 2 {
        return Err(SimError::Config("lambda.csv needs at least two rows".into()));
    }
    let delta_t = times[1] - times[0];
    if !(delta_t > 0.0) {
        return Err(SimError::Config("lambda.csv times must increase".into()));
    }
    for (i, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - delta_t).abs() > 1e-9 * delta_t.max(1.0) {
            return Err(SimError::Config(format!(
                "lambda.csv time grid is not uniform at row {}",
                i + 2
            )));
        }
    }
    Ok(BoundaryPath { delta_t, radii, jumps: vec![] })
}

pub fn profile_csv(t: f64, mesh: f64, values: &[f64]) -> String {
    let mut out = String::from("t,x,u\n");
    for (i, v) in values.iter().enumerate() {
        out.push_str(&fmt(t));
        out.push(',');
        out.push_str(&fmt(i as f64 * mesh));
        out.push(',');
        out.push_str(&fmt(*v));
        out.push('\n');
    }
    out
}

pub fn audit_csv(run: &RunResult) -> String {
    let mut out =
        String::from("step,t,mass,volume,residual_step,residual_cum,sampling_loss,is_melt\n");
    for row in &run.audit.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.step,
            fmt(row.time),
            fmt(row.mass),
            fmt(row.volume),
            fmt(row.residual_step),
            fmt(row.residual_cum),
            fmt(row.sampling_loss),
            row.is_melt as u8
        ));
    }
    out
}

pub fn physicality_csv(reports: &[JumpReport]) -> String {
    let mut out = String::from(
        "time,lambda_before,lambda_after,drop,lower_bound,lower_bound_relaxed,relaxation,upper_bound,verdict,endpoint_only\n",
    );
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            fmt(r.time),
            fmt(r.lambda_before),
            fmt(r.lambda_after),
            fmt(r.drop()),
            fmt(r.lower_bound),
            fmt(r.lower_bound_relaxed),
            fmt(r.relaxation),
            fmt(r.upper_bound),
            r.verdict,
            r.endpoint_only as u8
        ));
    }
    out
}

/// Snapshot profile file name for a given time, stable across runs.
pub fn profile_filename(dir: &Path, label: &str, t: f64) -> PathBuf {
    dir.join(format!("{label}_t{:.6}.csv", t))
}
