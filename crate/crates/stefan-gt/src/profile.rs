//! Temperature-deficit profiles on a uniform radial grid.
//!
//! A profile stores node values of u and is read as piecewise linear in
//! between; it is a density against ν(dx) = x^{d-1} dx and is identically
//! zero beyond the truncation radius.

use crate::error::{Result, SimError};
use crate::quadrature::nu_linear;

#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureProfile {
    h: f64,
    values: Vec<f64>,
}

impl TemperatureProfile {
    /// Build from node values. Roundoff-scale negatives are clamped to zero;
    /// genuinely negative values are rejected (the deficit is non-negative).
    pub fn new(h: f64, mut values: Vec<f64>) -> Result<Self> {
        if !(h > 0.0) || h.is_nan() {
            return Err(SimError::Config("mesh must be positive".into()));
        }
        if values.len() < 2 {
            return Err(SimError::Config("profile needs at least two nodes".into()));
        }
        let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for v in &mut values {
            if !v.is_finite() {
                return Err(SimError::Domain("profile value not finite".into()));
            }
            if *v < 0.0 {
                if *v < -1e-9 * scale {
                    return Err(SimError::Domain(format!(
                        "negative profile value {v} exceeds roundoff tolerance"
                    )));
                }
                *v = 0.0;
            }
        }
        Ok(Self { h, values })
    }

    pub fn mesh(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x_max(&self) -> f64 {
        self.h * (self.values.len() - 1) as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn node(&self, i: usize) -> f64 {
        self.h * i as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.values.len()).map(|i| self.node(i)).collect()
    }

    /// Piecewise-linear value at x; zero beyond the domain.
    pub fn value_at(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return self.values[0];
        }
        if x >= self.x_max() {
            return if x == self.x_max() { *self.values.last().unwrap() } else { 0.0 };
        }
        let j = (x / self.h).floor() as usize;
        let j = j.min(self.values.len() - 2);
        let t = (x - self.node(j)) / self.h;
        self.values[j] * (1.0 - t) + self.values[j + 1] * t
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(*v))
    }

    /// ν-integral of the profile over [a, b] ⊆ [0, x_max].
    pub fn nu_integral(&self, a: f64, b: f64, d: u32) -> Result<f64> {
        if a < 0.0 || b > self.x_max() + 1e-12 * self.h || a > b {
            return Err(SimError::Domain(format!(
                "nu_integral bounds [{a}, {b}] outside grid [0, {}]",
                self.x_max()
            )));
        }
        let b = b.min(self.x_max());
        if a >= b {
            return Ok(0.0);
        }
        let ja = (a / self.h).floor() as usize;
        let jb = ((b / self.h).ceil() as usize).min(self.values.len() - 1);
        let mut total = 0.0;
        for j in ja..jb {
            let lo = self.node(j).max(a);
            let hi = self.node(j + 1).min(b);
            if hi <= lo {
                continue;
            }
            total += nu_linear(lo, hi, self.value_at(lo), self.value_at(hi), d);
        }
        Ok(total)
    }

    /// Total ν-mass over the whole grid.
    pub fn nu_mass(&self, d: u32) -> f64 {
        self.nu_integral(0.0, self.x_max(), d).expect("full-domain bounds are valid")
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(SimError::Domain("profile length mismatch".into()));
        }
        Self::new(self.h, values)
    }
}
