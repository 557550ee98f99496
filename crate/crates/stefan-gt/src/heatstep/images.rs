//! Image-kernel backend, exact in time for d ∈ {1, 3}.
//!
//! For d = 1 the Bessel process is Brownian motion reflected at the origin,
//! so the frozen step is a half-line Dirichlet problem above λ (odd images
//! about λ) and a mixed Neumann/Dirichlet problem on (0, λ).
//!
//! For d = 3 the substitution w(x) = x·u(x) turns the radial equation into
//! the flat heat equation: above λ a half-line Dirichlet problem with
//! boundary value λ·H(λ) = γ, below λ an interval problem with w(0) = 0 and
//! w(λ) = γ. Subtracting the harmonic profile with the same boundary values
//! leaves pure absorbed-kernel convolutions of piecewise-linear data, which
//! integrate in closed form cell by cell.
//!
//! The exponential-horizon variant replaces heat kernels by the killed
//! resolvent kernels at θ = 1/Δ; all kernels are assembled from
//! non-positive-exponent terms so large θ cannot overflow.

use super::{conv_gauss_linear, conv_zgauss_linear, norm_sf};
use crate::boundary::gibbs_thomson;
use crate::error::{Result, SimError};
use crate::profile::TemperatureProfile;

/// Piecewise-linear data of one region as integration cells (a, b, fa, fb).
struct Cells(Vec<(f64, f64, f64, f64)>);

impl Cells {
    /// Cells covering [lo, hi] of the function with node values `f`, cut
    /// exactly at the interval ends.
    fn build(profile: &TemperatureProfile, f: &dyn Fn(usize, f64) -> f64, lo: f64, hi: f64) -> Self {
        let h = profile.mesh();
        let n = profile.len() - 1;
        let interp = |x: f64| -> f64 {
            let j = ((x / h).floor() as usize).min(n - 1);
            let t = (x - j as f64 * h) / h;
            f(j, j as f64 * h) * (1.0 - t) + f(j + 1, (j + 1) as f64 * h) * t
        };
        let mut cells = Vec::new();
        let j_lo = (lo / h).floor() as usize;
        let j_hi = ((hi / h).ceil() as usize).min(n);
        for j in j_lo..j_hi {
            let a = (j as f64 * h).max(lo);
            let b = ((j + 1) as f64 * h).min(hi);
            if b - a > 1e-15 * h {
                cells.push((a, b, interp(a), interp(b)));
            }
        }
        Cells(cells)
    }
}

fn require_d13(d: u32) -> Result<()> {
    if d == 1 || d == 3 {
        Ok(())
    } else {
        Err(SimError::Backend(format!(
            "images backend supports d in {{1, 3}}, got d={d}"
        )))
    }
}

/// Number of image copies needed so discarded ones sit ≥ 8√t away.
fn image_count(t: f64, lambda: f64) -> i64 {
    ((8.0 * t.sqrt() + lambda) / (2.0 * lambda)).ceil() as i64 + 1
}

pub fn step_frozen_images(
    u: &TemperatureProfile,
    lambda: f64,
    dt: f64,
    d: u32,
    gamma: f64,
) -> Result<TemperatureProfile> {
    require_d13(d)?;
    let hval = gibbs_thomson(lambda, gamma);
    let x_max = u.x_max();
    let t = dt;
    let n_img = image_count(t, lambda);

    // region data minus its harmonic part (constant above λ; constant for
    // d=1 / linear through (0,0),(λ,γ) for d=3 below λ)
    let w_of = |j: usize, x: f64| if d == 3 { x * u.values()[j] } else { u.values()[j] };
    let bc_out = if d == 3 { gamma } else { hval };
    let outer = Cells::build(u, &|j, x| w_of(j, x) - bc_out, lambda, x_max);
    let inner_harmonic = |x: f64| if d == 3 { gamma * x / lambda } else { hval };
    let inner = Cells::build(u, &|j, x| w_of(j, x) - inner_harmonic(x), 0.0, lambda);

    let eval_outer = |x: f64| -> f64 {
        let mirror = 2.0 * lambda - x;
        let mut acc = 0.0;
        for &(a, b, fa, fb) in &outer.0 {
            acc += conv_gauss_linear(t, x, a, b, fa, fb) - conv_gauss_linear(t, mirror, a, b, fa, fb);
        }
        // data continues as -bc beyond the truncation radius
        acc -= bc_out * (norm_sf((x_max - x) / t.sqrt()) - norm_sf((x_max - mirror) / t.sqrt()));
        let w_val = bc_out + acc;
        if d == 3 { w_val / x } else { w_val }
    };

    let eval_inner = |x: f64| -> f64 {
        let mut acc = 0.0;
        for n in -n_img..=n_img {
            let shift = 2.0 * n as f64 * lambda;
            let (m1, m2) = (x - shift, -x - shift);
            let sign = if d == 1 && n.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
            for &(a, b, fa, fb) in &inner.0 {
                let direct = conv_gauss_linear(t, m1, a, b, fa, fb);
                let mirrored = conv_gauss_linear(t, m2, a, b, fa, fb);
                acc += if d == 3 {
                    direct - mirrored
                } else {
                    sign * (direct + mirrored)
                };
            }
        }
        let w_val = inner_harmonic(x) + acc;
        if d == 3 { w_val / x } else { w_val }
    };

    // d=3 origin: u(0) = lim w/x through the differentiated kernel
    let eval_origin_d3 = || -> f64 {
        let mut acc = 0.0;
        for n in -n_img..=n_img {
            let shift = 2.0 * n as f64 * lambda;
            for &(a, b, fa, fb) in &inner.0 {
                acc += 2.0 * conv_zgauss_linear(t, shift, a, b, fa, fb);
            }
        }
        gamma / lambda + acc
    };

    let mut out = Vec::with_capacity(u.len());
    for (i, &x) in u.grid().iter().enumerate() {
        let v = if i == u.len() - 1 {
            0.0 // truncation Dirichlet at x_max
        } else if (x - lambda).abs() < 1e-14 {
            hval
        } else if x > lambda {
            eval_outer(x)
        } else if x > 0.0 {
            eval_inner(x)
        } else if d == 3 {
            eval_origin_d3()
        } else {
            eval_inner(0.0)
        };
        out.push(v);
    }
    TemperatureProfile::new(u.mesh(), out)
}

// ---- exponential horizon (resolvent kernels at θ = 1/Δ) -------------------

/// ∫_a^b e^{s(y-a)} L(y) dy for the linear L through (a,fa), (b,fb).
fn int_exp_linear(s: f64, a: f64, b: f64, fa: f64, fb: f64) -> f64 {
    let len = b - a;
    if len <= 0.0 {
        return 0.0;
    }
    let beta = (fb - fa) / len;
    if (s * len).abs() < 1e-8 {
        return fa * len * (1.0 + 0.5 * s * len) + beta * len * len / 2.0;
    }
    let em1 = libm::expm1(s * len);
    fa * em1 / s + beta * (len * (s * len).exp() / s - em1 / (s * s))
}

/// One exponential kernel piece e^{e_at_a + s(y-a)} integrated against L;
/// `e_at_a` is the (non-positive) exponent at the cell's left end.
fn exp_cell(e_at_a: f64, s: f64, a: f64, b: f64, fa: f64, fb: f64) -> f64 {
    if e_at_a < -745.0 {
        return 0.0;
    }
    e_at_a.exp() * int_exp_linear(s, a, b, fa, fb)
}

/// ∫_cell e^{-w|x-y|} L(y) dy, splitting at x when it lies inside.
fn abs_exp_cell(w: f64, x: f64, a: f64, b: f64, fa: f64, fb: f64) -> f64 {
    let interp = |y: f64| fa + (fb - fa) * (y - a) / (b - a);
    if b <= x {
        exp_cell(-w * (x - a), w, a, b, fa, fb)
    } else if a >= x {
        exp_cell(-w * (a - x), -w, a, b, fa, fb)
    } else {
        let fm = interp(x);
        exp_cell(-w * (x - a), w, a, x, fa, fm) + exp_cell(0.0, -w, x, b, fm, fb)
    }
}

pub fn step_frozen_images_exponential(
    u: &TemperatureProfile,
    lambda: f64,
    dt_mean: f64,
    d: u32,
    gamma: f64,
) -> Result<TemperatureProfile> {
    require_d13(d)?;
    let hval = gibbs_thomson(lambda, gamma);
    let theta = 1.0 / dt_mean;
    let w = (2.0 * theta).sqrt();
    let x_max = u.x_max();

    let w_of = |j: usize, x: f64| if d == 3 { x * u.values()[j] } else { u.values()[j] };
    // here the raw data is integrated (it vanishes beyond x_max), no subtraction
    let outer = Cells::build(u, &w_of, lambda, x_max);
    let inner = Cells::build(u, &w_of, 0.0, lambda);
    let bc_out = if d == 3 { gamma } else { hval };

    // G_out(x,y) = (1/w)[e^{-w|x-y|} - e^{-w(x+y-2λ)}], x,y ≥ λ
    let eval_outer = |x: f64| -> f64 {
        let mut acc = 0.0;
        for &(a, b, fa, fb) in &outer.0 {
            acc += abs_exp_cell(w, x, a, b, fa, fb);
            acc -= exp_cell(-w * (x + a - 2.0 * lambda), -w, a, b, fa, fb);
        }
        let resolvent = theta * acc / w;
        let val = bc_out * (-w * (x - lambda)).exp() + resolvent;
        if d == 3 { val / x } else { val }
    };

    // interval kernels, all exponents ≤ 0 for 0 ≤ x,y ≤ λ:
    //   d=3 (absorbed at 0): (1/w)[e^{-w|x-y|} - e^{-w(2λ-x-y)} - e^{-w(x+y)}
    //                               + e^{-w(2λ-|x-y|)}] / (1 - e^{-2wλ})
    //   d=1 (reflected at 0): (1/w)[e^{-w|x-y|} - e^{-w(2λ-x-y)} + e^{-w(x+y)}
    //                               - e^{-w(2λ-|x-y|)}] / (1 + e^{-2wλ})
    let eval_inner = |x: f64| -> f64 {
        let e2 = (-2.0 * w * lambda).exp();
        let (refl_sign, denom) = if d == 3 { (-1.0, 1.0 - e2) } else { (1.0, 1.0 + e2) };
        let mut acc = 0.0;
        for &(a, b, fa, fb) in &inner.0 {
            acc += abs_exp_cell(w, x, a, b, fa, fb);
            acc -= exp_cell(-w * (2.0 * lambda - x - a), w, a, b, fa, fb);
            acc += refl_sign * exp_cell(-w * (x + a), -w, a, b, fa, fb);
            // e^{-w(2λ-|x-y|)}: anchor per side of x
            let fourth = {
                let interp = |y: f64| fa + (fb - fa) * (y - a) / (b - a);
                if b <= x {
                    exp_cell(-w * (2.0 * lambda - x + a), -w, a, b, fa, fb)
                } else if a >= x {
                    exp_cell(-w * (2.0 * lambda + x - a), w, a, b, fa, fb)
                } else {
                    let fm = interp(x);
                    exp_cell(-w * (2.0 * lambda - x + a), -w, a, x, fa, fm)
                        + exp_cell(-w * 2.0 * lambda, w, x, b, fm, fb)
                }
            };
            acc -= refl_sign * fourth;
        }
        let resolvent = theta * acc / (w * denom);
        let boundary = if d == 3 {
            // sinh(wx)/sinh(wλ)
            gamma * (-w * (lambda - x)).exp() * (1.0 - (-2.0 * w * x).exp())
                / (1.0 - (-2.0 * w * lambda).exp())
        } else {
            // cosh(wx)/cosh(wλ)
            hval * (-w * (lambda - x)).exp() * (1.0 + (-2.0 * w * x).exp())
                / (1.0 + (-2.0 * w * lambda).exp())
        };
        let val = boundary + resolvent;
        if d == 3 { val / x } else { val }
    };

    // d=3 origin limit: G/x → 2[e^{-wy} - e^{-w(2λ-y)}]/(1 - e^{-2wλ}) and
    // the boundary factor sinh(wx)/(x sinh(wλ)) → 2w e^{-wλ}/(1 - e^{-2wλ})
    let eval_origin_d3 = || -> f64 {
        let denom = 1.0 - (-2.0 * w * lambda).exp();
        let mut acc = 0.0;
        for &(a, b, fa, fb) in &inner.0 {
            acc += exp_cell(-w * a, -w, a, b, fa, fb);
            acc -= exp_cell(-w * (2.0 * lambda - a), w, a, b, fa, fb);
        }
        let resolvent = theta * 2.0 * acc / denom;
        let boundary = 2.0 * gamma * w * (-w * lambda).exp() / denom;
        boundary + resolvent
    };

    let mut out = Vec::with_capacity(u.len());
    for (i, &x) in u.grid().iter().enumerate() {
        let v = if i == u.len() - 1 {
            0.0
        } else if (x - lambda).abs() < 1e-14 {
            hval
        } else if x > lambda {
            eval_outer(x)
        } else if x > 0.0 {
            eval_inner(x)
        } else if d == 3 {
            eval_origin_d3()
        } else {
            eval_inner(0.0)
        };
        out.push(v);
    }
    TemperatureProfile::new(u.mesh(), out)
}
