//! Truncated exponential law `E(a, b, r)` on `[a, b]`, density proportional
//! to `exp(-r t)`. Negative rates put more mass near `b`; `r = 0` is the
//! uniform law.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Rates with magnitude below this are treated as exactly uniform.
pub const UNIFORM_RATE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncExpParams {
    a: f64,
    b: f64,
    r: f64,
}

impl TruncExpParams {
    pub fn new(a: f64, b: f64, r: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && r.is_finite()) {
            return domain(format!("non-finite truncated exponential parameters ({a}, {b}, {r})"));
        }
        if a >= b {
            return domain(format!("truncated exponential needs a < b, got a={a}, b={b}"));
        }
        Ok(Self { a, b, r })
    }

    /// `E(0, T, r)`, the time law used for collocation.
    pub fn on_horizon(horizon: f64, r: f64) -> Result<Self> {
        Self::new(0.0, horizon, r)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn rate(&self) -> f64 {
        self.r
    }

    fn is_uniform(&self) -> bool {
        self.r.abs() < UNIFORM_RATE_EPS
    }

    fn contains(&self, t: f64) -> bool {
        t >= self.a && t <= self.b
    }
}

/// Density of `E(a, b, r)`; zero outside the support.
pub fn density(p: &TruncExpParams, t: f64) -> f64 {
    if !p.contains(t) {
        return 0.0;
    }
    let width = p.b - p.a;
    if p.is_uniform() {
        return 1.0 / width;
    }
    // r e^{-rt} / (e^{-ra} - e^{-rb}), rescaled by e^{rb} so the exponent
    // in the numerator stays bounded for either sign of r.
    p.r * (-p.r * (t - p.b)).exp() / (p.r * width).exp_m1()
}

/// Cumulative distribution function, clamped to `[0, 1]` outside the support.
pub fn cdf(p: &TruncExpParams, t: f64) -> f64 {
    if t <= p.a {
        return 0.0;
    }
    if t >= p.b {
        return 1.0;
    }
    let width = p.b - p.a;
    if p.is_uniform() {
        return (t - p.a) / width;
    }
    (-p.r * (t - p.a)).exp_m1() / (-p.r * width).exp_m1()
}

/// Inverse of [`cdf`]. `quantile(0) = a`, `quantile(1) = b`.
pub fn quantile(p: &TruncExpParams, q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return domain(format!("quantile level {q} outside [0, 1]"));
    }
    let width = p.b - p.a;
    if p.is_uniform() {
        return Ok(p.a + q * width);
    }
    // -ln(1 - q + q e^{-r(b-a)}) / r, written with ln1p/expm1.
    let offset = -(q * (-p.r * width).exp_m1()).ln_1p() / p.r;
    Ok((p.a + offset).clamp(p.a, p.b))
}

/// Quantiles at the midpoint levels `(i + 0.5) / n`.
pub fn quantile_grid(p: &TruncExpParams, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return domain("quantile grid needs at least one point");
    }
    (0..n)
        .map(|i| quantile(p, (i as f64 + 0.5) / n as f64))
        .collect()
}

/// Uniform cell midpoints `a + (i + 0.5)(b - a)/n`. Coincides bit-for-bit with
/// `quantile_grid` of the uniform law.
pub fn midpoint_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (i as f64 + 0.5) / n as f64 * (b - a))
        .collect()
}

/// Weights proportional to `exp(-r t_i)`, normalized to sum to one.
pub fn density_weights(p: &TruncExpParams, grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return domain("density weights need a non-empty grid");
    }
    if let Some(t) = grid.iter().find(|t| !p.contains(**t)) {
        return domain(format!("grid point {t} outside [{}, {}]", p.a, p.b));
    }
    if p.is_uniform() {
        return Ok(vec![1.0 / grid.len() as f64; grid.len()]);
    }
    let shift = grid
        .iter()
        .map(|t| p.r * t)
        .fold(f64::INFINITY, f64::min);
    let raw: Vec<f64> = grid.iter().map(|t| (shift - p.r * t).exp()).collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / total).collect())
}
