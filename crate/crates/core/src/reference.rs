//! Reference solutions used to score trained networks: the closed-form linear
//! ODE, a fine-grid finite-difference Burgers solver and an RK4 Lorenz
//! integrator with Hermite dense output.

use crate::error::{domain, Error, Result};
use crate::net::{MlpSpec, ParamVector};
use crate::par::Execution;
use crate::problems::{shifted_values, LinearOdeSpec, LorenzSpec, Problem};

/// Points per axis used by [`error_metrics`].
pub const METRIC_POINTS: usize = 256;

/// Grid of the Burgers reference. Odd, so `x = 0` is a node.
pub const BURGERS_GRID: usize = 2049;

/// Step of the Lorenz reference.
pub const LORENZ_STEP: f64 = 1e-4;

pub fn exact_linear(s: &LinearOdeSpec, t: f64) -> f64 {
    s.u0 * (s.lambda * t).exp()
}

/// Burgers solution sampled on a uniform space grid at uniform snapshot times.
#[derive(Debug, Clone)]
pub struct BurgersField {
    xs: Vec<f64>,
    times: Vec<f64>,
    snapshots: Vec<Vec<f64>>,
}

impl BurgersField {
    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshot(&self, k: usize) -> &[f64] {
        &self.snapshots[k]
    }

    /// Bilinear interpolation; `t` and `x` are clamped to the solved domain.
    pub fn at(&self, t: f64, x: f64) -> f64 {
        let (k, wt) = locate(&self.times, t);
        let (i, wx) = locate(&self.xs, x);
        let row = |s: &[f64]| s[i] * (1.0 - wx) + s[i + 1] * wx;
        row(&self.snapshots[k]) * (1.0 - wt) + row(&self.snapshots[k + 1]) * wt
    }
}

/// Index of the uniform-grid cell holding `v` and the fractional position in it.
fn locate(grid: &[f64], v: f64) -> (usize, f64) {
    let n = grid.len();
    let (lo, hi) = (grid[0], grid[n - 1]);
    let s = ((v - lo) / (hi - lo)).clamp(0.0, 1.0) * (n - 1) as f64;
    let i = (s.floor() as usize).min(n - 2);
    (i, s - i as f64)
}

/// Snapshot intervals of the Burgers reference; with [`METRIC_POINTS`] = 256
/// metric times fall exactly on snapshots.
const BURGERS_SNAPSHOTS: usize = METRIC_POINTS - 1;

/// Viscous Burgers with `u(0, x) = -sin(pi x)` and `u(t, +-1) = 0` on
/// `n_grid` points spanning `[-1, 1]`.
///
/// Conservative central advection `(u_{i+1}^2 - u_{i-1}^2) / 4dx`, central
/// diffusion, SSP-RK3 in time with
/// `dt <= min(0.4 dx^2 / nu, 0.4 dx / max|u0|)`.
pub fn solve_burgers_fd(nu: f64, n_grid: usize, horizon: f64) -> Result<BurgersField> {
    if n_grid < 256 {
        return domain(format!("Burgers reference needs at least 256 points, got {n_grid}"));
    }
    if !(nu > 0.0 && horizon > 0.0) {
        return domain("Burgers reference needs nu > 0 and a positive horizon");
    }
    let dx = 2.0 / (n_grid - 1) as f64;
    let xs: Vec<f64> = (0..n_grid).map(|i| -1.0 + i as f64 * dx).collect();
    // Build the initial profile antisymmetrically so odd symmetry holds bitwise.
    let mut u = vec![0.0; n_grid];
    for i in 0..n_grid / 2 {
        let v = -(std::f64::consts::PI * xs[i]).sin();
        u[i] = v;
        u[n_grid - 1 - i] = -v;
    }
    u[0] = 0.0;
    u[n_grid - 1] = 0.0;

    let umax = u.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
    let dt_max = (0.4 * dx * dx / nu).min(0.4 * dx / umax);
    let interval = horizon / BURGERS_SNAPSHOTS as f64;
    let substeps = (interval / dt_max).ceil() as usize;
    let dt = interval / substeps as f64;

    let rhs = |u: &[f64], out: &mut [f64]| {
        out[0] = 0.0;
        out[n_grid - 1] = 0.0;
        for i in 1..n_grid - 1 {
            let (l, c, r) = (u[i - 1], u[i], u[i + 1]);
            out[i] = -(r * r - l * l) / (4.0 * dx) + nu * ((r + l) - 2.0 * c) / (dx * dx);
        }
    };

    let mut snapshots = Vec::with_capacity(BURGERS_SNAPSHOTS + 1);
    snapshots.push(u.clone());
    let mut k1 = vec![0.0; n_grid];
    let mut stage = vec![0.0; n_grid];
    for _ in 0..BURGERS_SNAPSHOTS {
        for _ in 0..substeps {
            rhs(&u, &mut k1);
            for i in 0..n_grid {
                stage[i] = u[i] + dt * k1[i];
            }
            rhs(&stage, &mut k1);
            for i in 0..n_grid {
                stage[i] = 0.75 * u[i] + 0.25 * (stage[i] + dt * k1[i]);
            }
            rhs(&stage, &mut k1);
            for i in 0..n_grid {
                u[i] = u[i] / 3.0 + 2.0 / 3.0 * (stage[i] + dt * k1[i]);
            }
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver("Burgers finite-difference field became non-finite".into()));
        }
        snapshots.push(u.clone());
    }
    let times = (0..=BURGERS_SNAPSHOTS)
        .map(|k| k as f64 * interval)
        .collect();
    Ok(BurgersField { xs, times, snapshots })
}

/// RK4 trajectory with cubic Hermite dense output.
#[derive(Debug, Clone)]
pub struct LorenzTrajectory {
    step: f64,
    states: Vec<[f64; 3]>,
    slopes: Vec<[f64; 3]>,
}

impl LorenzTrajectory {
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn horizon(&self) -> f64 {
        self.step * (self.states.len() - 1) as f64
    }

    pub fn states(&self) -> &[[f64; 3]] {
        &self.states
    }

    pub fn final_state(&self) -> [f64; 3] {
        *self.states.last().expect("trajectory is never empty")
    }

    pub fn at(&self, t: f64) -> [f64; 3] {
        let n = self.states.len() - 1;
        let s = (t / self.step).clamp(0.0, n as f64);
        let k = (s.floor() as usize).min(n - 1);
        let th = s - k as f64;
        let h = self.step;
        let h00 = (1.0 + 2.0 * th) * (1.0 - th) * (1.0 - th);
        let h10 = th * (1.0 - th) * (1.0 - th);
        let h01 = th * th * (3.0 - 2.0 * th);
        let h11 = th * th * (th - 1.0);
        let (y0, y1, f0, f1) = (self.states[k], self.states[k + 1], self.slopes[k], self.slopes[k + 1]);
        std::array::from_fn(|i| h00 * y0[i] + h * h10 * f0[i] + h01 * y1[i] + h * h11 * f1[i])
    }
}

/// One classical RK4 step.
pub fn rk4_step(s: &LorenzSpec, y: [f64; 3], h: f64) -> [f64; 3] {
    let add = |a: [f64; 3], b: [f64; 3], c: f64| -> [f64; 3] { std::array::from_fn(|i| a[i] + c * b[i]) };
    let k1 = s.rhs(y);
    let k2 = s.rhs(add(y, k1, h / 2.0));
    let k3 = s.rhs(add(y, k2, h / 2.0));
    let k4 = s.rhs(add(y, k3, h));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Integrates from `s.init` to `s.horizon`. The step is shrunk so an integer
/// number of steps lands on the horizon.
pub fn solve_lorenz_rk4(s: &LorenzSpec, h: f64) -> Result<LorenzTrajectory> {
    if !(h > 0.0) || !(s.horizon > 0.0) {
        return domain("Lorenz integration needs h > 0 and a positive horizon");
    }
    let steps = (s.horizon / h).ceil().max(1.0) as usize;
    let step = s.horizon / steps as f64;
    let mut states = Vec::with_capacity(steps + 1);
    let mut y = s.init;
    states.push(y);
    for _ in 0..steps {
        y = rk4_step(s, y, step);
        states.push(y);
    }
    if states.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Solver("Lorenz trajectory became non-finite".into()));
    }
    let slopes = states.iter().map(|y| s.rhs(*y)).collect();
    Ok(LorenzTrajectory { step, states, slopes })
}

/// Reference solution matched to a problem.
#[derive(Debug, Clone)]
pub enum Reference {
    Linear(LinearOdeSpec),
    Burgers(BurgersField),
    Lorenz(LorenzTrajectory),
}

impl Reference {
    /// Default resolutions: [`BURGERS_GRID`] points, RK4 step [`LORENZ_STEP`].
    pub fn for_problem(problem: &Problem) -> Result<Self> {
        Ok(match problem {
            Problem::Linear(s) => Reference::Linear(*s),
            Problem::Burgers(s) => Reference::Burgers(solve_burgers_fd(s.nu, BURGERS_GRID, s.horizon)?),
            Problem::Lorenz(s) => Reference::Lorenz(solve_lorenz_rk4(s, LORENZ_STEP)?),
        })
    }
}

impl Reference {
    /// Size of the reference solution at the horizon in the norm used by
    /// `final_error`.
    pub fn final_norm(&self) -> f64 {
        match self {
            Reference::Linear(s) => exact_linear(s, s.horizon).abs(),
            Reference::Lorenz(traj) => traj.final_state().iter().map(|v| v * v).sum::<f64>().sqrt(),
            Reference::Burgers(field) => {
                let last = field.snapshot(field.times().len() - 1);
                let sq: Vec<f64> = last.iter().map(|v| v * v).collect();
                let hx = field.xs()[1] - field.xs()[0];
                trapezoid(&sq, hx).sqrt()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMetrics {
    /// Error at the horizon: absolute (linear), Euclidean (Lorenz) or
    /// L2-in-x (Burgers).
    pub final_error: f64,
    /// Trapezoid integral over `[0, T]` of the same pointwise norm.
    pub integral_error: f64,
}

fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    h * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1]))
}

/// Scores a network against a reference on [`METRIC_POINTS`] uniform times
/// (and, for Burgers, [`METRIC_POINTS`] uniform positions).
pub fn error_metrics(
    problem: &Problem,
    spec: &MlpSpec,
    params: &ParamVector,
    reference: &Reference,
    exec: Execution,
) -> Result<ErrorMetrics> {
    let horizon = problem.horizon();
    let n = METRIC_POINTS;
    let ht = horizon / (n - 1) as f64;
    let times: Vec<f64> = (0..n).map(|k| k as f64 * ht).collect();
    let norms: Vec<f64> = match (problem, reference) {
        (Problem::Linear(_), Reference::Linear(s)) => {
            let vals = shifted_values(problem, spec, params, &times, exec)?;
            times
                .iter()
                .zip(vals)
                .map(|(t, v)| (v[0] - exact_linear(s, *t)).abs())
                .collect()
        }
        (Problem::Lorenz(_), Reference::Lorenz(traj)) => {
            let vals = shifted_values(problem, spec, params, &times, exec)?;
            times
                .iter()
                .zip(vals)
                .map(|(t, v)| {
                    let r = traj.at(*t);
                    (0..3).map(|k| (v[k] - r[k]).powi(2)).sum::<f64>().sqrt()
                })
                .collect()
        }
        (Problem::Burgers(_), Reference::Burgers(field)) => {
            let hx = 2.0 / (n - 1) as f64;
            let xs: Vec<f64> = (0..n).map(|j| -1.0 + j as f64 * hx).collect();
            let points: Vec<f64> = times.iter().flat_map(|t| xs.iter().flat_map(move |x| [*t, *x])).collect();
            let vals = shifted_values(problem, spec, params, &points, exec)?;
            times
                .iter()
                .enumerate()
                .map(|(k, t)| {
                    let sq: Vec<f64> = xs
                        .iter()
                        .enumerate()
                        .map(|(j, x)| (vals[k * n + j][0] - field.at(*t, *x)).powi(2))
                        .collect();
                    trapezoid(&sq, hx).sqrt()
                })
                .collect()
        }
        _ => return domain("reference does not match the problem"),
    };
    let final_error = norms[n - 1];
    let integral_error = trapezoid(&norms, ht);
    if !final_error.is_finite() || !integral_error.is_finite() {
        return Err(Error::NonFinite("error metrics"));
    }
    Ok(ErrorMetrics {
        final_error,
        integral_error,
    })
}
