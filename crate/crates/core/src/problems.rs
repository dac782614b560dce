//! Benchmark problems and their sampled residual losses.
//!
//! Every network output goes through the initial-condition shift
//! `U(t, .) - U(0, .) + u0(.)`, so initial data hold exactly and the loss
//! only contains the equation residual (plus a boundary penalty for Burgers).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::net::{self, EvalJet, JetAdjoint, JetObjective, MlpSpec, ParamVector, Want};
use crate::par::Execution;
use crate::sampling::{density_weights, midpoint_grid, quantile_grid, TruncExpParams};

/// `u' = lambda u`, `u(0) = u0` on `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearOdeSpec {
    pub lambda: f64,
    pub u0: f64,
    pub horizon: f64,
}

impl Default for LinearOdeSpec {
    fn default() -> Self {
        Self {
            lambda: 2.0,
            u0: 15f64.sqrt(),
            horizon: 1.0,
        }
    }
}

/// `u_t + u u_x = nu u_xx` on `[0, horizon] x [-1, 1]`, `u(0, x) = -sin(pi x)`,
/// `u(t, +-1) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurgersSpec {
    pub nu: f64,
    pub horizon: f64,
    /// Weight of the boundary penalty.
    pub c_bc: f64,
    pub n_space: usize,
    pub n_time: usize,
}

impl Default for BurgersSpec {
    fn default() -> Self {
        Self {
            nu: 0.01 / PI,
            horizon: 1.0,
            c_bc: 1.0,
            n_space: 25,
            n_time: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorenzSpec {
    pub sigma: f64,
    pub rho_lorenz: f64,
    pub beta: f64,
    pub init: [f64; 3],
    pub horizon: f64,
    pub n_time: usize,
}

impl Default for LorenzSpec {
    fn default() -> Self {
        Self {
            sigma: 10.0,
            rho_lorenz: 28.0,
            beta: 8.0 / 3.0,
            init: [1.0, 1.0, 1.0],
            horizon: 1.0,
            n_time: 100,
        }
    }
}

impl LorenzSpec {
    pub fn rhs(&self, s: [f64; 3]) -> [f64; 3] {
        let [x, y, z] = s;
        [
            self.sigma * (y - x),
            x * (self.rho_lorenz - z) - y,
            x * y - self.beta * z,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Problem {
    Linear(LinearOdeSpec),
    Burgers(BurgersSpec),
    Lorenz(LorenzSpec),
}

impl Problem {
    pub fn validate(&self) -> Result<()> {
        match self {
            Problem::Linear(s) => {
                if !(s.horizon > 0.0) {
                    return domain("linear ODE horizon must be positive");
                }
            }
            Problem::Burgers(s) => {
                if !(s.nu > 0.0 && s.horizon > 0.0) {
                    return domain("Burgers needs nu > 0 and a positive horizon");
                }
                if s.n_space < 2 || s.n_time < 2 {
                    return domain("Burgers grid needs at least 2 points per axis");
                }
                if !(s.c_bc >= 0.0) {
                    return domain("boundary penalty weight must be non-negative");
                }
            }
            Problem::Lorenz(s) => {
                if !(s.horizon > 0.0) || s.n_time < 2 {
                    return domain("Lorenz needs a positive horizon and n_time >= 2");
                }
            }
        }
        Ok(())
    }

    pub fn horizon(&self) -> f64 {
        match self {
            Problem::Linear(s) => s.horizon,
            Problem::Burgers(s) => s.horizon,
            Problem::Lorenz(s) => s.horizon,
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Problem::Burgers(_) => 2,
            _ => 1,
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Problem::Lorenz(_) => 3,
            _ => 1,
        }
    }

    /// Network used for this problem unless overridden: 5 x 10 for the linear
    /// ODE, 9 x 20 for Burgers, 5 x 20 for Lorenz.
    pub fn default_mlp(&self) -> MlpSpec {
        let (layers, width) = match self {
            Problem::Linear(_) => (5, 10),
            Problem::Burgers(_) => (9, 20),
            Problem::Lorenz(_) => (5, 20),
        };
        self.mlp(layers, width)
    }

    pub fn mlp(&self, hidden_layers: usize, hidden_width: usize) -> MlpSpec {
        MlpSpec {
            input_dim: self.input_dim(),
            output_dim: self.output_dim(),
            hidden_layers,
            hidden_width,
        }
    }

    /// Default number of collocation times.
    pub fn default_time_points(&self) -> usize {
        match self {
            Problem::Linear(_) => 100,
            Problem::Burgers(s) => s.n_time,
            Problem::Lorenz(s) => s.n_time,
        }
    }
}

/// Initial Burgers profile and its first two derivatives.
pub fn burgers_initial(x: f64) -> (f64, f64, f64) {
    let (s, c) = (PI * x).sin_cos();
    (-s, -PI * c, PI * PI * s)
}

/// How collocation times and their weights are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SamplingMode {
    /// Times are the midpoint-level quantiles of the law, equal weights.
    QuantileGrid { law: TruncExpParams, n: usize },
    /// Uniform midpoint times, weights from the law's density.
    WeightedUniform { law: TruncExpParams, n: usize },
}

impl SamplingMode {
    pub fn quantile(horizon: f64, rate: f64, n: usize) -> Result<Self> {
        Ok(SamplingMode::QuantileGrid {
            law: TruncExpParams::on_horizon(horizon, rate)?,
            n,
        })
    }

    pub fn weighted(horizon: f64, rate: f64, n: usize) -> Result<Self> {
        Ok(SamplingMode::WeightedUniform {
            law: TruncExpParams::on_horizon(horizon, rate)?,
            n,
        })
    }

    pub fn law(&self) -> &TruncExpParams {
        match self {
            SamplingMode::QuantileGrid { law, .. } | SamplingMode::WeightedUniform { law, .. } => law,
        }
    }

    /// Collocation times and weights summing to one.
    pub fn time_nodes(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        match *self {
            SamplingMode::QuantileGrid { law, n } => {
                let times = quantile_grid(&law, n)?;
                Ok((times, vec![1.0 / n as f64; n]))
            }
            SamplingMode::WeightedUniform { law, n } => {
                if n == 0 {
                    return domain("weighted sampling needs at least one point");
                }
                let times = midpoint_grid(law.a(), law.b(), n);
                let weights = density_weights(&law, &times)?;
                Ok((times, weights))
            }
        }
    }
}

fn check_horizon(problem: &Problem, mode: &SamplingMode) -> Result<()> {
    let law = mode.law();
    if law.a() != 0.0 || (law.b() - problem.horizon()).abs() > 1e-12 * problem.horizon() {
        return domain(format!(
            "sampling law lives on [{}, {}], problem horizon is {}",
            law.a(),
            law.b(),
            problem.horizon()
        ));
    }
    Ok(())
}

/// Shifted network `U(t, x) - U(0, x) + u0(x)` and its input derivatives.
pub fn shifted_eval(problem: &Problem, spec: &MlpSpec, params: &ParamVector, input: &[f64]) -> Result<EvalJet> {
    match problem {
        Problem::Linear(s) => {
            let jet = net::evaluate(spec, params, input, Want::DT)?;
            let anchor = net::evaluate(spec, params, &[0.0], Want::VALUE)?;
            Ok(EvalJet {
                value: vec![jet.value[0] - anchor.value[0] + s.u0],
                ..jet
            })
        }
        Problem::Lorenz(s) => {
            let jet = net::evaluate(spec, params, input, Want::DT)?;
            let anchor = net::evaluate(spec, params, &[0.0], Want::VALUE)?;
            let value = (0..3).map(|k| jet.value[k] - anchor.value[k] + s.init[k]).collect();
            Ok(EvalJet { value, ..jet })
        }
        Problem::Burgers(_) => {
            if input.len() != 2 {
                return domain("Burgers evaluation needs (t, x)");
            }
            let x = input[1];
            let jet = net::evaluate(spec, params, input, Want::ALL)?;
            let anchor = net::evaluate(spec, params, &[0.0, x], Want::ALL)?;
            let (u0, u0x, u0xx) = burgers_initial(x);
            let dx = jet.dx.as_ref().unwrap()[0] - anchor.dx.as_ref().unwrap()[0] + u0x;
            let dxx = jet.dxx.as_ref().unwrap()[0] - anchor.dxx.as_ref().unwrap()[0] + u0xx;
            Ok(EvalJet {
                value: vec![jet.value[0] - anchor.value[0] + u0],
                dt: jet.dt,
                dx: Some(vec![dx]),
                dxx: Some(vec![dxx]),
            })
        }
    }
}

/// Shifted values only, for many points. Cheaper than repeated
/// [`shifted_eval`] because anchors are shared.
pub fn shifted_values(
    problem: &Problem,
    spec: &MlpSpec,
    params: &ParamVector,
    points: &[f64],
    exec: Execution,
) -> Result<Vec<Vec<f64>>> {
    let jets = net::evaluate_batch(spec, params, points, Want::VALUE, exec)?;
    match problem {
        Problem::Linear(_) | Problem::Lorenz(_) => {
            let anchor = net::evaluate(spec, params, &[0.0], Want::VALUE)?.value;
            let init: Vec<f64> = match problem {
                Problem::Linear(s) => vec![s.u0],
                Problem::Lorenz(s) => s.init.to_vec(),
                Problem::Burgers(_) => unreachable!(),
            };
            Ok(jets
                .into_iter()
                .map(|j| (0..init.len()).map(|k| j.value[k] - anchor[k] + init[k]).collect())
                .collect())
        }
        Problem::Burgers(_) => {
            let anchors: Vec<f64> = points.chunks(2).flat_map(|p| [0.0, p[1]]).collect();
            let base = net::evaluate_batch(spec, params, &anchors, Want::VALUE, exec)?;
            Ok(jets
                .into_iter()
                .zip(base)
                .zip(points.chunks(2))
                .map(|((j, b), p)| vec![j.value[0] - b.value[0] + burgers_initial(p[1]).0])
                .collect())
        }
    }
}

pub fn residual_linear(s: &LinearOdeSpec, spec: &MlpSpec, params: &ParamVector, t: f64) -> Result<f64> {
    let jet = shifted_eval(&Problem::Linear(*s), spec, params, &[t])?;
    Ok(jet.dt[0] - s.lambda * jet.value[0])
}

pub fn residual_burgers(s: &BurgersSpec, spec: &MlpSpec, params: &ParamVector, t: f64, x: f64) -> Result<f64> {
    let jet = shifted_eval(&Problem::Burgers(*s), spec, params, &[t, x])?;
    let (u, ux, uxx) = (jet.value[0], jet.dx.unwrap()[0], jet.dxx.unwrap()[0]);
    Ok(jet.dt[0] + u * ux - s.nu * uxx)
}

pub fn residual_lorenz(s: &LorenzSpec, spec: &MlpSpec, params: &ParamVector, t: f64) -> Result<[f64; 3]> {
    let jet = shifted_eval(&Problem::Lorenz(*s), spec, params, &[t])?;
    let f = s.rhs([jet.value[0], jet.value[1], jet.value[2]]);
    Ok([jet.dt[0] - f[0], jet.dt[1] - f[1], jet.dt[2] - f[2]])
}

/// The sampled residual loss of one problem, with collocation fixed at
/// construction.
///
/// Point layout: linear/Lorenz use `[t_0 .. t_{n-1}, 0]`; Burgers uses the
/// interior grid (time-major), the `(0, x_j)` anchors, the boundary points
/// `(t_i, -1), (t_i, 1)` and finally the anchors `(0, -1), (0, 1)`.
#[derive(Debug, Clone)]
pub struct PinnLoss {
    problem: Problem,
    times: Vec<f64>,
    weights: Vec<f64>,
    xs: Vec<f64>,
    points: Vec<f64>,
}

impl PinnLoss {
    pub fn new(problem: &Problem, mode: &SamplingMode) -> Result<Self> {
        problem.validate()?;
        check_horizon(problem, mode)?;
        let (times, weights) = mode.time_nodes()?;
        let mut points = Vec::new();
        let mut xs = Vec::new();
        match problem {
            Problem::Linear(_) | Problem::Lorenz(_) => {
                points.extend(&times);
                points.push(0.0);
            }
            Problem::Burgers(s) => {
                let n = s.n_space;
                xs = (0..n).map(|j| -1.0 + 2.0 * (j as f64 + 0.5) / n as f64).collect();
                for &t in &times {
                    for &x in &xs {
                        points.extend([t, x]);
                    }
                }
                for &x in &xs {
                    points.extend([0.0, x]);
                }
                for &t in &times {
                    points.extend([t, -1.0, t, 1.0]);
                }
                points.extend([0.0, -1.0, 0.0, 1.0]);
            }
        }
        Ok(Self {
            problem: *problem,
            times,
            weights,
            xs,
            points,
        })
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn loss_gradient(&self, spec: &MlpSpec, params: &ParamVector, exec: Execution) -> Result<(f64, Vec<f64>)> {
        self.check_spec(spec)?;
        net::loss_gradient(spec, params, self, exec)
    }

    pub fn loss(&self, spec: &MlpSpec, params: &ParamVector, exec: Execution) -> Result<f64> {
        self.check_spec(spec)?;
        net::loss_value(spec, params, self, exec)
    }

    fn check_spec(&self, spec: &MlpSpec) -> Result<()> {
        if spec.input_dim != self.problem.input_dim() || spec.output_dim != self.problem.output_dim() {
            return domain(format!(
                "network {}->{} does not fit problem {}->{}",
                spec.input_dim,
                spec.output_dim,
                self.problem.input_dim(),
                self.problem.output_dim()
            ));
        }
        Ok(())
    }

    fn linear(&self, s: &LinearOdeSpec, jets: &[EvalJet]) -> (f64, Vec<JetAdjoint>) {
        let n = self.times.len();
        let anchor = jets[n].value[0];
        let mut adj: Vec<JetAdjoint> = (0..=n).map(|_| JetAdjoint::zeros(1)).collect();
        let mut loss = 0.0;
        let mut anchor_adj = 0.0;
        for i in 0..n {
            let u = jets[i].value[0] - anchor + s.u0;
            let r = jets[i].dt[0] - s.lambda * u;
            let w = self.weights[i];
            loss += w * r * r;
            let g = 2.0 * w * r;
            adj[i].dt[0] = g;
            adj[i].value[0] = -s.lambda * g;
            anchor_adj += s.lambda * g;
        }
        adj[n].value[0] = anchor_adj;
        (loss, adj)
    }

    fn lorenz(&self, s: &LorenzSpec, jets: &[EvalJet]) -> (f64, Vec<JetAdjoint>) {
        let n = self.times.len();
        let anchor = &jets[n].value;
        let mut adj: Vec<JetAdjoint> = (0..=n).map(|_| JetAdjoint::zeros(3)).collect();
        let mut loss = 0.0;
        let mut anchor_adj = [0.0; 3];
        for i in 0..n {
            let u: [f64; 3] = std::array::from_fn(|k| jets[i].value[k] - anchor[k] + s.init[k]);
            let f = s.rhs(u);
            let r: [f64; 3] = std::array::from_fn(|k| jets[i].dt[k] - f[k]);
            let w = self.weights[i];
            loss += w * (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
            let g: [f64; 3] = std::array::from_fn(|k| 2.0 * w * r[k]);
            let [x, y, z] = u;
            // -J^T g with J the Jacobian of the right-hand side at u.
            let du = [
                -(-s.sigma * g[0] + (s.rho_lorenz - z) * g[1] + y * g[2]),
                -(s.sigma * g[0] - g[1] + x * g[2]),
                -(-x * g[1] - s.beta * g[2]),
            ];
            adj[i].dt.copy_from_slice(&g);
            adj[i].value.copy_from_slice(&du);
            for k in 0..3 {
                anchor_adj[k] -= du[k];
            }
        }
        adj[n].value.copy_from_slice(&anchor_adj);
        (loss, adj)
    }

    fn burgers(&self, s: &BurgersSpec, jets: &[EvalJet]) -> (f64, Vec<JetAdjoint>) {
        let nt = self.times.len();
        let nx = self.xs.len();
        let interior = nt * nx;
        let anchors = interior;
        let boundary = anchors + nx;
        let boundary_anchors = boundary + 2 * nt;
        let mut adj: Vec<JetAdjoint> = (0..jets.len()).map(|_| JetAdjoint::zeros(1)).collect();
        let mut loss = 0.0;
        for i in 0..nt {
            let wi = self.weights[i] / nx as f64;
            for j in 0..nx {
                let p = i * nx + j;
                let a = anchors + j;
                let (u0, u0x, u0xx) = burgers_initial(self.xs[j]);
                let (jp, ja) = (&jets[p], &jets[a]);
                let u = jp.value[0] - ja.value[0] + u0;
                let ux = jp.dx.as_ref().unwrap()[0] - ja.dx.as_ref().unwrap()[0] + u0x;
                let uxx = jp.dxx.as_ref().unwrap()[0] - ja.dxx.as_ref().unwrap()[0] + u0xx;
                let r = jp.dt[0] + u * ux - s.nu * uxx;
                loss += wi * r * r;
                let g = 2.0 * wi * r;
                adj[p].dt[0] = g;
                adj[p].value[0] = g * ux;
                adj[p].dx[0] = g * u;
                adj[p].dxx[0] = -s.nu * g;
                adj[a].value[0] -= g * ux;
                adj[a].dx[0] -= g * u;
                adj[a].dxx[0] += s.nu * g;
            }
        }
        if s.c_bc > 0.0 {
            for i in 0..nt {
                let wb = s.c_bc * self.weights[i] * 0.5;
                for side in 0..2 {
                    let p = boundary + 2 * i + side;
                    let a = boundary_anchors + side;
                    // u0(+-1) = 0
                    let b = jets[p].value[0] - jets[a].value[0];
                    loss += wb * b * b;
                    adj[p].value[0] += 2.0 * wb * b;
                    adj[a].value[0] -= 2.0 * wb * b;
                }
            }
        }
        (loss, adj)
    }
}

impl JetObjective for PinnLoss {
    fn points(&self) -> &[f64] {
        &self.points
    }

    fn want(&self) -> Want {
        match self.problem {
            Problem::Burgers(_) => Want::ALL,
            _ => Want::DT,
        }
    }

    fn value_and_adjoints(&self, jets: &[EvalJet]) -> (f64, Vec<JetAdjoint>) {
        match &self.problem {
            Problem::Linear(s) => self.linear(s, jets),
            Problem::Burgers(s) => self.burgers(s, jets),
            Problem::Lorenz(s) => self.lorenz(s, jets),
        }
    }
}

/// Loss and parameter gradient of `problem` under `mode`.
pub fn assemble_loss(
    problem: &Problem,
    spec: &MlpSpec,
    params: &ParamVector,
    mode: &SamplingMode,
) -> Result<(f64, Vec<f64>)> {
    PinnLoss::new(problem, mode)?.loss_gradient(spec, params, Execution::default())
}
