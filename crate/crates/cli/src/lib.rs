//! Command implementations behind the `pinn-ts` binary.
//!
//! Every command returns its data and writes CSV/JSON through a caller
//! supplied writer, so the binary stays a thin dispatcher.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use pinn_tsampling::net::{init_glorot, write_checkpoint, MlpSpec};
use pinn_tsampling::par::map_each;
use pinn_tsampling::problems::{BurgersSpec, LinearOdeSpec, LorenzSpec, Problem, SamplingMode};
use pinn_tsampling::reference::{exact_linear, solve_burgers_fd, solve_lorenz_rk4, Reference, METRIC_POINTS};
use pinn_tsampling::theory::{
    discrete_budget_oracle, error_bound, final_time_kernel, scan_rates, BudgetProblem, RateScan,
};
use pinn_tsampling::trainer::{train_from, train_observed, write_history_csv, TrainConfig, TrainRecord};
use pinn_tsampling::{Error, Execution, Result};
use serde::Serialize;

use args::{Cli, Command, ProblemArgs, ProblemKind, ReferenceArgs, RunArgs, SweepArgs, TheoryArgs, TrainArgs};

/// 2 for bad input, 3 for numerical failure, 1 for I/O.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Domain(_) => 2,
        Error::NonFinite(_) | Error::Diverged { .. } | Error::Solver(_) => 3,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => 1,
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Train(a) => {
            let summary = cmd_train(a, Execution::default())?;
            let mut out = io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, &summary)?;
            writeln!(out)?;
        }
        Command::Sweep(a) => {
            let sweep = cmd_sweep(a, Execution::default())?;
            with_output(a.out.as_deref(), |w| write_sweep_csv(w, &sweep))?;
        }
        Command::Theory(a) => {
            let report = cmd_theory(a, Execution::default())?;
            with_output(a.out.as_deref(), |w| write_theory_csv(w, &report))?;
        }
        Command::Reference(a) => {
            with_output(a.out.as_deref(), |w| cmd_reference(a, w))?;
        }
    }
    Ok(())
}

fn with_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

impl ProblemArgs {
    pub fn build(&self, npoints: Option<usize>) -> Result<Problem> {
        let problem = match self.problem {
            ProblemKind::Linear => Problem::Linear(LinearOdeSpec {
                lambda: self.lambda,
                horizon: self.horizon,
                ..Default::default()
            }),
            ProblemKind::Burgers => {
                let d = BurgersSpec::default();
                Problem::Burgers(BurgersSpec {
                    horizon: self.horizon,
                    n_time: npoints.unwrap_or(d.n_time),
                    ..d
                })
            }
            ProblemKind::Lorenz => {
                let d = LorenzSpec::default();
                Problem::Lorenz(LorenzSpec {
                    horizon: self.horizon,
                    n_time: npoints.unwrap_or(d.n_time),
                    ..d
                })
            }
        };
        problem.validate()?;
        Ok(problem)
    }
}

/// Everything a training run needs except the rate.
#[derive(Debug, Clone)]
pub struct RunSetup {
    pub problem: Problem,
    pub spec: MlpSpec,
    pub cfg: TrainConfig,
    pub weighted: bool,
    pub npoints: usize,
}

impl RunArgs {
    pub fn setup(&self) -> Result<RunSetup> {
        let problem = self.problem.build(self.npoints)?;
        let d = problem.default_mlp();
        let spec = problem.mlp(self.layers.unwrap_or(d.hidden_layers), self.width.unwrap_or(d.hidden_width));
        spec.validate()?;
        let linear = matches!(problem, Problem::Linear(_));
        let cfg = TrainConfig {
            iterations: self.iters.unwrap_or(if linear { 500 } else { 10_000 }),
            seed: self.seed,
            history_stride: self.stride.unwrap_or(if linear { 10 } else { 100 }),
            ..Default::default()
        };
        cfg.validate()?;
        Ok(RunSetup {
            problem,
            spec,
            cfg,
            weighted: self.weighted || matches!(problem, Problem::Lorenz(_)),
            npoints: self.npoints.unwrap_or(problem.default_time_points()),
        })
    }
}

impl RunSetup {
    pub fn mode(&self, rate: f64) -> Result<SamplingMode> {
        let horizon = self.problem.horizon();
        if self.weighted {
            SamplingMode::weighted(horizon, rate, self.npoints)
        } else {
            SamplingMode::quantile(horizon, rate, self.npoints)
        }
    }

    fn sampling_name(&self) -> &'static str {
        if self.weighted {
            "weighted"
        } else {
            "quantile"
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub problem: Problem,
    pub sampling: &'static str,
    pub rate: f64,
    pub iterations: usize,
    pub seed: u64,
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub npoints: usize,
    pub init_fingerprint: String,
    pub final_loss: f64,
    pub final_error: f64,
    pub integral_error: f64,
    /// `final_error` over the size of the reference at the horizon.
    pub relative_final_error: f64,
}

pub const HISTORY_FILE: &str = "history.csv";
pub const CHECKPOINT_FILE: &str = "params.ckpt";
pub const SUMMARY_FILE: &str = "summary.json";

/// Trains into `args.out`. A diverged run still leaves the partial history
/// and the last finite parameters behind.
pub fn cmd_train(args: &TrainArgs, exec: Execution) -> Result<Summary> {
    let setup = args.run.setup()?;
    let mode = setup.mode(args.rate)?;
    let reference = Reference::for_problem(&setup.problem)?;
    fs::create_dir_all(&args.out)?;
    let init = init_glorot(&setup.spec, setup.cfg.seed);
    let fingerprint = init.fingerprint();
    let mut history: Vec<TrainRecord> = Vec::new();
    let result = train_observed(
        &setup.problem,
        &setup.spec,
        init,
        &mode,
        &setup.cfg,
        Some(&reference),
        exec,
        |rec| history.push(rec.clone()),
    );
    write_history_csv(BufWriter::new(File::create(args.out.join(HISTORY_FILE))?), &history)?;
    let outcome = match result {
        Ok(o) => o,
        Err(Error::Diverged { iteration, last_finite }) => {
            let f = BufWriter::new(File::create(args.out.join(CHECKPOINT_FILE))?);
            write_checkpoint(f, &setup.spec, setup.cfg.seed, iteration, &last_finite)?;
            return Err(Error::Diverged { iteration, last_finite });
        }
        Err(e) => return Err(e),
    };
    let f = BufWriter::new(File::create(args.out.join(CHECKPOINT_FILE))?);
    write_checkpoint(f, &setup.spec, setup.cfg.seed, setup.cfg.iterations, &outcome.params)?;
    let metrics = outcome.metrics.expect("reference attached");
    let summary = Summary {
        problem: setup.problem,
        sampling: setup.sampling_name(),
        rate: args.rate,
        iterations: setup.cfg.iterations,
        seed: setup.cfg.seed,
        hidden_layers: setup.spec.hidden_layers,
        hidden_width: setup.spec.hidden_width,
        npoints: setup.npoints,
        init_fingerprint: format!("{fingerprint:016x}"),
        final_loss: outcome.final_loss,
        final_error: metrics.final_error,
        integral_error: metrics.integral_error,
        relative_final_error: metrics.final_error / reference.final_norm(),
    };
    let mut f = BufWriter::new(File::create(args.out.join(SUMMARY_FILE))?);
    serde_json::to_writer_pretty(&mut f, &summary)?;
    writeln!(f)?;
    f.flush()?;
    Ok(summary)
}

/// One sweep point. `None` marks a diverged run.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub rate: f64,
    pub result: Option<SweepMetrics>,
    pub iterations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepMetrics {
    pub final_error: f64,
    pub integral_error: f64,
    pub final_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    /// Sorted by rate.
    pub records: Vec<SweepRecord>,
    pub init_fingerprint: u64,
}

impl Sweep {
    /// Record with the smallest final error among converged runs.
    pub fn argmin(&self) -> Option<&SweepRecord> {
        self.records
            .iter()
            .filter(|r| r.result.is_some())
            .min_by(|a, b| {
                let (ea, eb) = (a.result.unwrap().final_error, b.result.unwrap().final_error);
                ea.total_cmp(&eb)
            })
    }
}

pub fn cmd_sweep(args: &SweepArgs, exec: Execution) -> Result<Sweep> {
    let setup = args.run.setup()?;
    run_sweep(&setup, &args.rates.rates(), exec)
}

/// Trains one network per rate, all from the Glorot draw of the configured
/// seed. Runs are spread over workers; each run is itself sequential.
pub fn run_sweep(setup: &RunSetup, rates: &[f64], exec: Execution) -> Result<Sweep> {
    let reference = Reference::for_problem(&setup.problem)?;
    let init = init_glorot(&setup.spec, setup.cfg.seed);
    let cfg = TrainConfig {
        history_stride: setup.cfg.iterations.max(1),
        ..setup.cfg
    };
    let modes = rates.iter().map(|r| setup.mode(*r)).collect::<Result<Vec<_>>>()?;
    let inner = if exec.is_parallel() { Execution::Sequential } else { exec };
    let jobs: Vec<(f64, SamplingMode)> = rates.iter().copied().zip(modes).collect();
    let results = map_each(&jobs, exec, |(rate, mode)| {
        let run = train_from(&setup.problem, &setup.spec, init.clone(), mode, &cfg, Some(&reference), inner);
        let result = match run {
            Ok(o) => {
                let m = o.metrics.expect("reference attached");
                Ok(Some(SweepMetrics {
                    final_error: m.final_error,
                    integral_error: m.integral_error,
                    final_loss: o.final_loss,
                }))
            }
            Err(Error::Diverged { .. }) | Err(Error::NonFinite(_)) => Ok(None),
            Err(e) => Err(e),
        };
        result.map(|result| SweepRecord {
            rate: *rate,
            result,
            iterations: cfg.iterations,
            seed: cfg.seed,
        })
    });
    let mut records = results.into_iter().collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| a.rate.total_cmp(&b.rate));
    Ok(Sweep {
        records,
        init_fingerprint: init.fingerprint(),
    })
}

pub fn write_sweep_csv(w: &mut dyn Write, sweep: &Sweep) -> Result<()> {
    writeln!(w, "r,final_error,integral_error,final_loss,iterations,seed")?;
    for rec in &sweep.records {
        match rec.result {
            Some(m) => writeln!(
                w,
                "{},{:e},{:e},{:e},{},{}",
                rec.rate, m.final_error, m.integral_error, m.final_loss, rec.iterations, rec.seed
            )?,
            None => writeln!(w, "{},diverged,diverged,diverged,{},{}", rec.rate, rec.iterations, rec.seed)?,
        }
    }
    match sweep.argmin() {
        Some(best) => writeln!(
            w,
            "# argmin_r={} final_error={:e}",
            best.rate,
            best.result.expect("converged").final_error
        )?,
        None => writeln!(w, "# argmin_r=none")?,
    }
    writeln!(w, "# init_fingerprint={:016x}", sweep.init_fingerprint)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryReport {
    pub lambda: f64,
    pub horizon: f64,
    pub budget: f64,
    pub error_bound: f64,
    pub oracle_min_error: f64,
    pub scan: RateScan,
}

pub fn cmd_theory(args: &TheoryArgs, exec: Execution) -> Result<TheoryReport> {
    let bp = BudgetProblem::new(args.lambda, args.horizon, args.budget, args.grid)?;
    let oracle = discrete_budget_oracle(&bp, final_time_kernel(args.lambda, args.horizon))?;
    let scan = scan_rates(&args.rates.rates(), args.lambda, args.horizon, args.budget, exec)?;
    Ok(TheoryReport {
        lambda: args.lambda,
        horizon: args.horizon,
        budget: args.budget,
        error_bound: error_bound(args.lambda, args.horizon, args.budget),
        oracle_min_error: oracle.min_error,
        scan,
    })
}

pub fn write_theory_csv(w: &mut dyn Write, report: &TheoryReport) -> Result<()> {
    writeln!(w, "# lambda={} T={} budget={}", report.lambda, report.horizon, report.budget)?;
    writeln!(w, "# error_bound={:e}", report.error_bound)?;
    writeln!(w, "# oracle_min_error={:e}", report.oracle_min_error)?;
    writeln!(w, "# argmin_r={}", report.scan.argmin)?;
    writeln!(w, "r,induced_error")?;
    for (r, e) in report.scan.rates.iter().zip(&report.scan.errors) {
        writeln!(w, "{r},{e:e}")?;
    }
    Ok(())
}

/// Linear: `t,u` on the metric grid. Burgers: `t,x,u` for every snapshot and
/// grid point. Lorenz: `t,x,y,z` at every RK4 step.
pub fn cmd_reference(args: &ReferenceArgs, w: &mut dyn Write) -> Result<()> {
    let problem = args.problem.build(None)?;
    match problem {
        Problem::Linear(s) => {
            writeln!(w, "t,u")?;
            let n = METRIC_POINTS;
            for k in 0..n {
                let t = k as f64 * s.horizon / (n - 1) as f64;
                writeln!(w, "{t},{}", exact_linear(&s, t))?;
            }
        }
        Problem::Burgers(s) => {
            let field = solve_burgers_fd(s.nu, args.nx, s.horizon)?;
            writeln!(w, "t,x,u")?;
            for (k, t) in field.times().iter().enumerate() {
                for (x, u) in field.xs().iter().zip(field.snapshot(k)) {
                    writeln!(w, "{t},{x},{u}")?;
                }
            }
        }
        Problem::Lorenz(s) => {
            if !(args.h > 0.0) {
                return Err(Error::Domain(format!("step must be positive, got {}", args.h)));
            }
            let traj = solve_lorenz_rk4(&s, args.h)?;
            writeln!(w, "t,x,y,z")?;
            for (k, y) in traj.states().iter().enumerate() {
                let t = (k as f64 * traj.step()).min(traj.horizon());
                writeln!(w, "{t},{},{},{}", y[0], y[1], y[2])?;
            }
        }
    }
    Ok(())
}
