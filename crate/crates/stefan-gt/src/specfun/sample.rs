//! Exact sampling of the Bessel-process marginal.
//!
//! R_s² given R_0 = x is s times a noncentral chi-square with d degrees of
//! freedom and noncentrality x²/s; equivalently put the whole mean in one
//! Gaussian coordinate and add an independent central χ²_{d−1}.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

/// One exact draw from ψ(s; x, ·).
pub fn sample_bessel<R: Rng + ?Sized>(d: u32, x: f64, s: f64, rng: &mut R) -> f64 {
    debug_assert!(d >= 1 && x >= 0.0 && s > 0.0);
    let z: f64 = rng.sample(StandardNormal);
    let first = x + s.sqrt() * z;
    let rest = if d > 1 {
        let chi = ChiSquared::new((d - 1) as f64).expect("d - 1 >= 1");
        s * chi.sample(rng)
    } else {
        0.0
    };
    (first * first + rest).sqrt()
}
