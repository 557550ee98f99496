//! Transition density ψ(s; x, y) of the d-dimensional Bessel process,
//!
//!   ψ(s;x,y) = (y/s)(y/x)^{d/2−1} e^{−(x²+y²)/(2s)} I_{d/2−1}(xy/s),
//!
//! evaluated through the scaled I so the exponent collapses to the finite
//! −(x−y)²/(2s); the x → 0 limit is taken analytically.

use super::bessel::bessel_i_scaled;

pub fn transition_density(d: u32, s: f64, x: f64, y: f64) -> f64 {
    debug_assert!(s > 0.0 && x >= 0.0);
    if y <= 0.0 {
        return 0.0;
    }
    let nu = d as f64 / 2.0 - 1.0;
    let arg = x * y / s;
    if arg < 1e-6 {
        // I_ν(w) ≈ (w/2)^ν/Γ(ν+1): the (y/x)^ν singularity cancels exactly
        let half = d as f64 / 2.0;
        return y.powi(d as i32 - 1) * (-(x * x + y * y) / (2.0 * s)).exp()
            / ((2.0 * s).powf(half - 1.0) * s * libm::tgamma(half));
    }
    (y / s) * (y / x).powf(nu) * bessel_i_scaled(nu, arg) * (-(x - y) * (x - y) / (2.0 * s)).exp()
}
