//! Full-batch Adam on the sampled residual loss.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::net::{init_glorot, MlpSpec, ParamVector};
use crate::par::Execution;
use crate::problems::{PinnLoss, Problem, SamplingMode};
use crate::reference::{error_metrics, ErrorMetrics, Reference};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Record every `history_stride` iterations; the final iterate is always recorded.
    pub history_stride: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            iterations: 500,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-7,
            seed: 0,
            history_stride: 10,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return domain("learning rate must be positive");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return domain("Adam betas must lie in [0, 1)");
        }
        if !(self.epsilon > 0.0) {
            return domain("Adam epsilon must be positive");
        }
        if self.history_stride == 0 {
            return domain("history stride must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            step: 0,
        }
    }
}

/// One bias-corrected Adam update. Leaves `state` and `params` untouched
/// when the update would be non-finite.
pub fn adam_step(state: &mut AdamState, params: &mut ParamVector, grad: &[f64], cfg: &TrainConfig) -> Result<()> {
    let n = params.len();
    if grad.len() != n || state.m.len() != n || state.v.len() != n {
        return domain("Adam state, parameters and gradient must have equal length");
    }
    let step = state.step + 1;
    let c1 = 1.0 - cfg.beta1.powi(step as i32);
    let c2 = 1.0 - cfg.beta2.powi(step as i32);
    let mut m = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    let mut theta = Vec::with_capacity(n);
    for (((&g, &m0), &v0), &p) in grad.iter().zip(&state.m).zip(&state.v).zip(params.as_slice()) {
        let mi = cfg.beta1 * m0 + (1.0 - cfg.beta1) * g;
        let vi = cfg.beta2 * v0 + (1.0 - cfg.beta2) * g * g;
        let update = cfg.learning_rate * (mi / c1) / ((vi / c2).sqrt() + cfg.epsilon);
        m.push(mi);
        v.push(vi);
        theta.push(p - update);
    }
    if theta.iter().chain(&m).chain(&v).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("Adam update"));
    }
    state.m = m;
    state.v = v;
    state.step = step;
    params.as_mut_slice().copy_from_slice(&theta);
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub iteration: usize,
    pub loss: f64,
    pub final_error: Option<f64>,
    pub integral_error: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ParamVector,
    pub history: Vec<TrainRecord>,
    pub final_loss: f64,
    /// Present when a reference was attached.
    pub metrics: Option<ErrorMetrics>,
}

/// Trains from the Glorot initialization of `cfg.seed`.
pub fn train(
    problem: &Problem,
    spec: &MlpSpec,
    mode: &SamplingMode,
    cfg: &TrainConfig,
    oracle: Option<&Reference>,
    exec: Execution,
) -> Result<TrainOutcome> {
    train_from(problem, spec, init_glorot(spec, cfg.seed), mode, cfg, oracle, exec)
}

/// Trains from explicit initial parameters. A non-finite loss, gradient or
/// update ends the run with [`Error::Diverged`] carrying the last finite
/// iterate. Use [`train_observed`] to keep the partial history.
pub fn train_from(
    problem: &Problem,
    spec: &MlpSpec,
    init: ParamVector,
    mode: &SamplingMode,
    cfg: &TrainConfig,
    oracle: Option<&Reference>,
    exec: Execution,
) -> Result<TrainOutcome> {
    train_observed(problem, spec, init, mode, cfg, oracle, exec, |_| {})
}

/// [`train_from`] with a callback invoked on every history record as it is
/// produced.
#[allow(clippy::too_many_arguments)]
pub fn train_observed(
    problem: &Problem,
    spec: &MlpSpec,
    init: ParamVector,
    mode: &SamplingMode,
    cfg: &TrainConfig,
    oracle: Option<&Reference>,
    exec: Execution,
    mut observe: impl FnMut(&TrainRecord),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let loss = PinnLoss::new(problem, mode)?;
    let mut params = init;
    let mut state = AdamState::new(params.len());
    let mut history = Vec::new();

    let mut record = |iteration: usize, value: f64, params: &ParamVector, history: &mut Vec<TrainRecord>| -> Result<Option<ErrorMetrics>> {
        let metrics = match oracle {
            Some(reference) => Some(error_metrics(problem, spec, params, reference, exec)?),
            None => None,
        };
        let rec = TrainRecord {
            iteration,
            loss: value,
            final_error: metrics.map(|m| m.final_error),
            integral_error: metrics.map(|m| m.integral_error),
        };
        observe(&rec);
        history.push(rec);
        Ok(metrics)
    };
    let diverged = |iteration: usize, params: &ParamVector| Error::Diverged {
        iteration,
        last_finite: Box::new(params.clone()),
    };

    for k in 0..cfg.iterations {
        let (value, grad) = match loss.loss_gradient(spec, &params, exec) {
            Ok(lg) => lg,
            Err(Error::NonFinite(_)) => return Err(diverged(k, &params)),
            Err(e) => return Err(e),
        };
        if k % cfg.history_stride == 0 {
            match record(k, value, &params, &mut history) {
                Err(Error::NonFinite(_)) => return Err(diverged(k, &params)),
                other => {
                    other?;
                }
            }
        }
        if let Err(e) = adam_step(&mut state, &mut params, &grad, cfg) {
            return Err(match e {
                Error::NonFinite(_) => diverged(k, &params),
                e => e,
            });
        }
    }
    let final_loss = match loss.loss(spec, &params, exec) {
        Ok(v) => v,
        Err(Error::NonFinite(_)) => return Err(diverged(cfg.iterations, &params)),
        Err(e) => return Err(e),
    };
    let metrics = match record(cfg.iterations, final_loss, &params, &mut history) {
        Err(Error::NonFinite(_)) => return Err(diverged(cfg.iterations, &params)),
        other => other?,
    };
    Ok(TrainOutcome {
        params,
        history,
        final_loss,
        metrics,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `iteration,loss,final_error,integral_error`; missing errors are empty fields.
pub fn write_history_csv<W: Write>(w: W, history: &[TrainRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["iteration", "loss", "final_error", "integral_error"])?;
    for r in history {
        out.write_record([
            r.iteration.to_string(),
            r.loss.to_string(),
            fmt_opt(r.final_error),
            fmt_opt(r.integral_error),
        ])?;
    }
    out.flush()?;
    Ok(())
}
