//! Quadrature against the radial volume measure ν(dx) = x^{d-1} dx.
//!
//! Piecewise-linear integrands are integrated with the exact per-cell
//! moments of x^{d-1}, so two ν-integrals of the same profile over adjacent
//! intervals add to machine precision. The boundary temperature H(x) = γ/x
//! has its own exact antiderivative against ν, used by the energy-balance
//! root finder where a sampled H would quantize roots by O(h).

/// ∫_a^b x^{d-1} dx = (b^d - a^d)/d.
pub fn nu_moment0(a: f64, b: f64, d: u32) -> f64 {
    (b.powi(d as i32) - a.powi(d as i32)) / d as f64
}

/// ∫_a^b x^d dx = (b^{d+1} - a^{d+1})/(d+1).
pub fn nu_moment1(a: f64, b: f64, d: u32) -> f64 {
    let p = d as i32 + 1;
    (b.powi(p) - a.powi(p)) / p as f64
}

/// ν-integral of the linear function through (a, fa) and (b, fb) over [a, b].
pub fn nu_linear(a: f64, b: f64, fa: f64, fb: f64, d: u32) -> f64 {
    if b <= a {
        return 0.0;
    }
    let slope = (fb - fa) / (b - a);
    let m0 = nu_moment0(a, b, d);
    let m1 = nu_moment1(a, b, d);
    fa * m0 + slope * (m1 - a * m0)
}

/// ∫_a^b H(x) ν(dx) with H(x) = γ/x: γ(b^{d-1} - a^{d-1})/(d-1) for d ≥ 2,
/// γ ln(b/a) for d = 1 (rightly +∞ when a = 0 < b).
pub fn nu_h_integral(a: f64, b: f64, gamma: f64, d: u32) -> f64 {
    if b <= a {
        return 0.0;
    }
    if d == 1 {
        gamma * (b / a).ln()
    } else {
        let p = d as i32 - 1;
        gamma * (b.powi(p) - a.powi(p)) / p as f64
    }
}

/// ∫_a^b (H(x) - 1) ν(dx), the jump-condition counterweight.
pub fn nu_h_minus_one(a: f64, b: f64, gamma: f64, d: u32) -> f64 {
    nu_h_integral(a, b, gamma, d) - nu_moment0(a, b, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_one_matches_volume() {
        // nu-mass of the figure1-preset indicator support
        assert!((nu_linear(0.0, 0.81, 1.0, 1.0, 3) - 0.177147).abs() < 1e-12);
    }

    #[test]
    fn h_integral_closed_form_d3() {
        // gamma (b^2 - a^2)/2
        let v = nu_h_integral(0.5, 0.7, 1.0, 3);
        assert!((v - 0.12).abs() < 1e-15);
    }

    #[test]
    fn h_integral_d1_is_log() {
        let v = nu_h_integral(1.0, 1.066, 1.0, 1);
        assert!((v - 1.066f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn h_integral_diverges_at_zero_for_d1() {
        assert!(nu_h_integral(0.0, 0.5, 1.0, 1).is_infinite());
    }

    #[test]
    fn zero_integrand_is_zero() {
        assert_eq!(nu_linear(0.2, 0.9, 0.0, 0.0, 4), 0.0);
    }

    proptest! {
        #[test]
        fn additive_over_split(a in 0.0f64..2.0, len1 in 0.0f64..1.0, len2 in 0.0f64..1.0,
                               fa in 0.0f64..2.0, fm in 0.0f64..2.0, fb in 0.0f64..2.0,
                               d in 1u32..6) {
            let b = a + len1;
            let c = b + len2;
            // PL function with nodes (a,fa),(b,fm),(c,fb)
            let whole = nu_linear(a, b, fa, fm, d) + nu_linear(b, c, fm, fb, d);
            // split the first piece again at its midpoint
            let mid = 0.5 * (a + b);
            let fmid = 0.5 * (fa + fm);
            let split = nu_linear(a, mid, fa, fmid, d) + nu_linear(mid, b, fmid, fm, d)
                + nu_linear(b, c, fm, fb, d);
            prop_assert!((whole - split).abs() <= 1e-12 * (1.0 + whole.abs()));
        }
    }
}
