//! Implicit finite-difference backend for the radial heat equation, any
//! d ≥ 1. Backward Euler on geometrically graded substeps, centered space
//! with the Dirichlet value H(λ) pinned at the grid node nearest λ; the
//! O(h) node-snap error is recorded by the caller's audit, not here.
//!
//! The boundary datum is generally incompatible with the incoming profile,
//! so the solution opens an erfc layer of width √t at λ. A single backward
//! Euler step replaces that layer by a resolvent exponential, an O(√(τ/dt))
//! sup error; grading the substeps geometrically (first one ~dt/2^m) drives
//! the startup error below the O(h²/dt) spatial truncation of the layer.
//!
//! At x = 0 the singular drift is regularized by symmetry
//! ((d−1)/(2x) u_x → (d−1)/2 u_xx as x → 0, giving u_t = d (u_1 − u_0)/h²);
//! any interior node where the centered drift would break the M-matrix sign
//! (x_j < (d−1)h/2) falls back to an upwind difference, so the implicit
//! solve is unconditionally stable and monotone.

use crate::boundary::gibbs_thomson;
use crate::error::{Result, SimError};
use crate::profile::TemperatureProfile;

const SUBSTEPS: usize = 20;

/// Tridiagonal solve (Thomas algorithm); diagonals are rebuilt per call.
fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / m;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    rhs[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = d[i] - c[i] * rhs[i + 1];
    }
}

pub fn step_frozen_fd(
    u: &TemperatureProfile,
    lambda: f64,
    dt: f64,
    d: u32,
    gamma: f64,
) -> Result<TemperatureProfile> {
    let h = u.mesh();
    let n = u.len();
    let j_b = (lambda / h).round() as usize;
    if j_b == 0 || j_b >= n - 1 {
        return Err(SimError::Backend(format!(
            "Dirichlet node for lambda={lambda} falls on the grid edge (h={h}); need h < lambda < x_max - h"
        )));
    }
    let hval = gibbs_thomson(lambda, gamma);
    let dd = d as f64;

    // spatial operator coefficients (per unit time)
    let mut lo_c = vec![0.0; n];
    let mut hi_c = vec![0.0; n];
    for j in 1..n - 1 {
        if j == j_b {
            continue;
        }
        let x = j as f64 * h;
        let diffusion = 0.5 / (h * h);
        let drift = (dd - 1.0) / (2.0 * x);
        if diffusion >= drift / (2.0 * h) {
            lo_c[j] = diffusion - drift / (2.0 * h);
            hi_c[j] = diffusion + drift / (2.0 * h);
        } else {
            // upwind the (outward) drift to keep the off-diagonals signed
            lo_c[j] = diffusion;
            hi_c[j] = diffusion + drift / h;
        }
    }

    // graded substeps: τ_k = dt·2^{k-1}/(2^m − 1)
    let total: f64 = (2f64).powi(SUBSTEPS as i32) - 1.0;
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut values = u.values().to_vec();
    for k in 0..SUBSTEPS {
        let tau = dt * (2f64).powi(k as i32) / total;
        for j in 0..n {
            if j == j_b || j == n - 1 {
                sub[j] = 0.0;
                diag[j] = 1.0; // Dirichlet rows: H(λ) at the snap node, 0 at x_max
                sup[j] = 0.0;
            } else if j == 0 {
                // symmetric origin row: u_t = d (u_1 - u_0)/h²
                let c = tau * dd / (h * h);
                diag[0] = 1.0 + c;
                sup[0] = -c;
            } else {
                sub[j] = -tau * lo_c[j];
                sup[j] = -tau * hi_c[j];
                diag[j] = 1.0 + tau * (lo_c[j] + hi_c[j]);
            }
        }
        values[j_b] = hval;
        values[n - 1] = 0.0;
        thomas(&sub, &diag, &sup, &mut values);
    }
    values[j_b] = hval;
    values[n - 1] = 0.0;
    TemperatureProfile::new(h, values)
}
