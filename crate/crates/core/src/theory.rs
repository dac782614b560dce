//! Budget-constrained error analysis for `u' = lambda u`.
//!
//! A residual profile `w(t) >= 0` costs `int_0^T w^-2 dt`, capped at a
//! budget `B`, and drives a final-time error `int_0^T e^{lambda (T - t)} w dt`.
//! This module provides the closed-form optimum, the error produced by a
//! given sampling density, and a discrete Lagrange solver that recovers
//! optima without using any closed form.

use crate::error::{domain, Error, Result};
use crate::par::{map_each, Execution};
use crate::sampling::{density, TruncExpParams};

/// `|lambda|` below this uses the `lambda -> 0` limits.
pub const ZERO_LAMBDA_EPS: f64 = 1e-10;

/// Nodes of every composite trapezoid in this module.
pub const QUADRATURE_POINTS: usize = 10_001;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetProblem {
    pub lambda: f64,
    pub horizon: f64,
    pub budget: f64,
    pub n_grid: usize,
}

impl BudgetProblem {
    pub fn new(lambda: f64, horizon: f64, budget: f64, n_grid: usize) -> Result<Self> {
        if !(budget > 0.0) || !(horizon > 0.0) {
            return domain("budget problem needs B > 0 and T > 0");
        }
        if n_grid < 100 {
            return domain(format!("budget problem needs at least 100 cells, got {n_grid}"));
        }
        Ok(Self {
            lambda,
            horizon,
            budget,
            n_grid,
        })
    }
}

/// `int_0^T e^{c (T - t)} dt`, with the `c -> 0` limit `T`.
fn exp_integral(c: f64, horizon: f64) -> f64 {
    if c.abs() < ZERO_LAMBDA_EPS {
        horizon
    } else {
        (c * horizon).exp_m1() / c
    }
}

/// Smallest final-time error reachable with budget `B`:
/// `B^{-1/2} (3 (e^{2 lambda T / 3} - 1) / (2 lambda))^{3/2}`.
pub fn error_bound(lambda: f64, horizon: f64, budget: f64) -> f64 {
    exp_integral(2.0 * lambda / 3.0, horizon).powf(1.5) / budget.sqrt()
}

/// Scale of the optimal profile `kappa e^{-lambda (T - t) / 3}` that spends
/// exactly the budget.
fn optimal_scale(lambda: f64, horizon: f64, budget: f64) -> f64 {
    (exp_integral(2.0 * lambda / 3.0, horizon) / budget).sqrt()
}

/// The error-minimizing residual profile evaluated on `grid`.
pub fn optimal_profile(lambda: f64, horizon: f64, budget: f64, grid: &[f64]) -> Result<Vec<f64>> {
    if !(budget > 0.0) {
        return domain("budget must be positive");
    }
    if let Some(t) = grid.iter().find(|t| !(0.0..=horizon).contains(*t)) {
        return domain(format!("profile point {t} outside [0, {horizon}]"));
    }
    let kappa = optimal_scale(lambda, horizon, budget);
    Ok(grid
        .iter()
        .map(|t| kappa * (-lambda * (horizon - t) / 3.0).exp())
        .collect())
}

fn uniform_nodes(horizon: f64, n: usize) -> (Vec<f64>, f64) {
    let h = horizon / (n - 1) as f64;
    ((0..n).map(|i| i as f64 * h).collect(), h)
}

fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    h * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1]))
}

/// `int_0^T kernel(t) w(t) dt` for `w = c rho^{-1/4}` scaled to spend the
/// budget, i.e. the error reached when a loss sampled with density `rho` is
/// minimized under the budget.
pub fn induced_error_with_kernel(
    rho: impl Fn(f64) -> f64,
    kernel: impl Fn(f64) -> f64,
    horizon: f64,
    budget: f64,
) -> Result<f64> {
    if !(budget > 0.0) || !(horizon > 0.0) {
        return domain("induced error needs B > 0 and T > 0");
    }
    let (nodes, h) = uniform_nodes(horizon, QUADRATURE_POINTS);
    let values: Vec<f64> = nodes.iter().map(|t| rho(*t)).collect();
    if let Some(v) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return domain(format!("sampling density must be positive and finite, found {v}"));
    }
    let mass = trapezoid(&values, h);
    if (mass - 1.0).abs() > 1e-4 {
        return domain(format!("sampling density integrates to {mass}, not 1"));
    }
    let sqrt_mass = trapezoid(&values.iter().map(|v| v.sqrt()).collect::<Vec<_>>(), h);
    let c = (sqrt_mass / budget).sqrt();
    let err: Vec<f64> = nodes
        .iter()
        .zip(&values)
        .map(|(t, v)| kernel(*t) * c * v.powf(-0.25))
        .collect();
    Ok(trapezoid(&err, h))
}

/// Final-time error induced by sampling density `rho` for `u' = lambda u`.
pub fn induced_error_for_density(rho: impl Fn(f64) -> f64, lambda: f64, horizon: f64, budget: f64) -> Result<f64> {
    induced_error_with_kernel(rho, |t| (lambda * (horizon - t)).exp(), horizon, budget)
}

/// Induced error of the truncated exponential law `E(0, T, r)`.
pub fn induced_error_for_rate(rate: f64, lambda: f64, horizon: f64, budget: f64) -> Result<f64> {
    let law = TruncExpParams::on_horizon(horizon, rate)?;
    induced_error_for_density(|t| density(&law, t), lambda, horizon, budget)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateScan {
    pub rates: Vec<f64>,
    pub errors: Vec<f64>,
    pub argmin: f64,
}

/// `lo, lo + step, ..., hi`, generated by index so the grid does not drift.
pub fn rate_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return domain(format!("invalid rate range {lo}:{hi}:{step}"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|k| lo + k as f64 * step).collect())
}

/// Induced error over a list of rates and the minimizing rate.
pub fn scan_rates(rates: &[f64], lambda: f64, horizon: f64, budget: f64, exec: Execution) -> Result<RateScan> {
    if rates.is_empty() {
        return domain("rate scan needs at least one rate");
    }
    let errors = map_each(rates, exec, |r| induced_error_for_rate(*r, lambda, horizon, budget))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let best = errors
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty");
    Ok(RateScan {
        argmin: rates[best],
        rates: rates.to_vec(),
        errors,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    /// Cell midpoints.
    pub times: Vec<f64>,
    pub profile: Vec<f64>,
    pub min_error: f64,
    /// Lagrange multiplier of the budget constraint.
    pub multiplier: f64,
    /// `|sum dt / w^2 - B| / B`.
    pub budget_residual: f64,
}

/// Minimizes `sum_i kernel(t_i) w_i dt` subject to `sum_i dt / w_i^2 = B`
/// on `n_grid` equal cells with midpoints `t_i`.
///
/// Stationarity gives `w_i = (2 mu / kernel_i)^{1/3}`; the multiplier `mu`
/// is found by bisection on `ln mu` against the budget.
pub fn discrete_budget_oracle(bp: &BudgetProblem, kernel: impl Fn(f64) -> f64) -> Result<OracleSolution> {
    let n = bp.n_grid;
    let dt = bp.horizon / n as f64;
    let times: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * dt).collect();
    let k: Vec<f64> = times.iter().map(|t| kernel(*t)).collect();
    if let Some((t, v)) = times.iter().zip(&k).find(|(_, v)| !(**v > 0.0) || !v.is_finite()) {
        return domain(format!("kernel must be positive, got {v} at t = {t}"));
    }
    let profile_for = |log_mu: f64| -> Vec<f64> {
        k.iter()
            .map(|ki| ((std::f64::consts::LN_2 + log_mu - ki.ln()) / 3.0).exp())
            .collect()
    };
    let spend = |w: &[f64]| -> f64 { w.iter().map(|wi| dt / (wi * wi)).sum() };

    // Spending is decreasing in mu.
    let (mut lo, mut hi) = (-300.0f64, 300.0f64);
    if spend(&profile_for(lo)) < bp.budget || spend(&profile_for(hi)) > bp.budget {
        return Err(Error::Solver("budget multiplier outside the search bracket".into()));
    }
    let mut converged = false;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let s = spend(&profile_for(mid));
        if (s - bp.budget).abs() <= 1e-13 * bp.budget {
            lo = mid;
            hi = mid;
            converged = true;
            break;
        }
        if s > bp.budget {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    let log_mu = 0.5 * (lo + hi);
    let profile = profile_for(log_mu);
    let budget_residual = (spend(&profile) - bp.budget).abs() / bp.budget;
    if !converged || budget_residual > 1e-8 {
        return Err(Error::Solver(format!(
            "budget bisection did not converge (residual {budget_residual:e})"
        )));
    }
    let min_error = k.iter().zip(&profile).map(|(ki, wi)| ki * wi * dt).sum();
    Ok(OracleSolution {
        times,
        profile,
        min_error,
        multiplier: log_mu.exp(),
        budget_residual,
    })
}

/// Kernel `e^{lambda (T - t)}` of the final-time error.
pub fn final_time_kernel(lambda: f64, horizon: f64) -> impl Fn(f64) -> f64 {
    move |t| (lambda * (horizon - t)).exp()
}

/// Kernel `(e^{lambda (T - t)} - 1) / lambda` of the time-integrated error
/// `int_0^T |u_net - u| dt`; tends to `T - t` as `lambda -> 0`.
pub fn integral_metric_kernel(lambda: f64, horizon: f64) -> impl Fn(f64) -> f64 {
    move |t| {
        if lambda.abs() < ZERO_LAMBDA_EPS {
            horizon - t
        } else {
            (lambda * (horizon - t)).exp_m1() / lambda
        }
    }
}

/// Optimal sampling density for the time-integrated error metric,
/// proportional to `(e^{-lambda t} - e^{-lambda T})^{4/3}` (equivalently the
/// 4/3 power of [`integral_metric_kernel`]), normalized on `[0, T]`.
pub fn integral_metric_density(lambda: f64, horizon: f64, grid: &[f64]) -> Result<Vec<f64>> {
    if !(horizon > 0.0) {
        return domain("horizon must be positive");
    }
    if let Some(t) = grid.iter().find(|t| !(0.0..=horizon).contains(*t)) {
        return domain(format!("density point {t} outside [0, {horizon}]"));
    }
    let kernel = integral_metric_kernel(lambda, horizon);
    let shape = |t: f64| kernel(t).abs().powf(4.0 / 3.0);
    let (nodes, h) = uniform_nodes(horizon, QUADRATURE_POINTS);
    let norm = trapezoid(&nodes.iter().map(|t| shape(*t)).collect::<Vec<_>>(), h);
    Ok(grid.iter().map(|t| shape(*t) / norm).collect())
}

/// Both ends of the Hölder chain for the optimal profile:
/// `int e^{2 lambda (T - t)/3} dt` and
/// `(int e^{lambda (T - t)} w dt)^{2/3} (int w^{-2} dt)^{1/3}`.
pub fn holder_sides(lambda: f64, horizon: f64, budget: f64) -> Result<(f64, f64)> {
    let (nodes, h) = uniform_nodes(horizon, QUADRATURE_POINTS);
    let w = optimal_profile(lambda, horizon, budget, &nodes)?;
    let lhs = trapezoid(
        &nodes.iter().map(|t| (2.0 * lambda * (horizon - t) / 3.0).exp()).collect::<Vec<_>>(),
        h,
    );
    let err = trapezoid(
        &nodes
            .iter()
            .zip(&w)
            .map(|(t, wi)| (lambda * (horizon - t)).exp() * wi)
            .collect::<Vec<_>>(),
        h,
    );
    let cost = trapezoid(&w.iter().map(|wi| 1.0 / (wi * wi)).collect::<Vec<_>>(), h);
    Ok((lhs, err.powf(2.0 / 3.0) * cost.powf(1.0 / 3.0)))
}
