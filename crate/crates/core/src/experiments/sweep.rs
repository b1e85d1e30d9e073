use std::time::Instant;

use rayon::prelude::*;

use super::{make_initial_data, simulate_limit, simulate_system, InitialDataSpec};
use crate::error::{Error, Result};
use crate::grid::{Field, SolverConfig, SpaceTimeNorm};
use crate::model::{check_assumptions, ScaledModel, Variant, WolbachiaParams};
use crate::reduction::InvariantMonitor;

use super::wave::estimate_wave_speed;

/// Measurement settings of an ε-sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Strictly decreasing.
    pub epsilons: Vec<f64>,
    /// Horizon `T` of the space-time error norms (day).
    pub norm_horizon: f64,
    /// Sampling cadence of the error norms, in steps.
    pub norm_every: usize,
    pub speed_level: f64,
    pub speed_window: (f64, f64),
    /// Sampling cadence of the front position, in steps.
    pub speed_every: usize,
    /// Worker threads; 0 runs the simulations one after another.
    pub threads: usize,
}

impl SweepConfig {
    pub fn figure1() -> Self {
        Self {
            epsilons: vec![0.3, 0.1, 0.05, 0.02],
            norm_horizon: 25.0,
            norm_every: 1,
            speed_level: 0.5,
            speed_window: (75.0, 125.0),
            speed_every: 100,
            threads: 0,
        }
    }

    pub fn validate(&self, solver: &SolverConfig) -> Result<()> {
        if self.epsilons.is_empty() {
            return Err(Error::param("epsilons", "empty epsilon list"));
        }
        if self.epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::param("epsilons", "epsilons must be positive"));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::param("epsilons", "epsilons must be strictly decreasing"));
        }
        if !(self.norm_horizon >= solver.dt && self.norm_horizon <= solver.t_end + 1e-9) {
            return Err(Error::param(
                "norm_horizon",
                format!("norm horizon {} outside [dt, t_end]", self.norm_horizon),
            ));
        }
        if self.norm_every == 0 || self.speed_every == 0 {
            return Err(Error::param("norm_every", "sampling cadences must be at least 1"));
        }
        if !(self.speed_level > 0.0 && self.speed_level < 1.0) {
            return Err(Error::param("speed_level", format!("level {} not in (0, 1)", self.speed_level)));
        }
        let (a, b) = self.speed_window;
        if !(a >= 0.0 && b > a) {
            return Err(Error::param("speed_window", format!("empty window [{a}, {b}]")));
        }
        Ok(())
    }

    fn norm_steps(&self, dt: f64) -> usize {
        (self.norm_horizon / dt).round() as usize
    }

    fn samples_norm(&self, step: usize, dt: f64) -> bool {
        step <= self.norm_steps(dt) && step % self.norm_every == 0
    }

    fn samples_speed(&self, step: usize, dt: f64) -> bool {
        let t = step as f64 * dt;
        let tol = 1e-9 * self.speed_window.1.max(1.0);
        step % self.speed_every == 0 && t >= self.speed_window.0 - tol && t <= self.speed_window.1 + tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub epsilons: Vec<f64>,
    pub err_p: Vec<f64>,
    pub err_m: Vec<f64>,
    /// Front speed of each system run; `None` when the front could not be
    /// tracked over the window.
    pub speeds: Vec<Option<f64>>,
    pub limit_speed: Option<f64>,
    /// Wall-clock seconds per ε; the only non-deterministic entries.
    pub runtimes: Vec<f64>,
    pub monitors: Vec<InvariantMonitor>,
    pub limit_monitor: InvariantMonitor,
}

impl ConvergenceReport {
    /// Equality of everything except wall-clock runtimes.
    pub fn same_results(&self, other: &Self) -> bool {
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        let obits = |v: &[Option<f64>]| v.iter().map(|x| x.map(f64::to_bits)).collect::<Vec<_>>();
        bits(&self.epsilons) == bits(&other.epsilons)
            && bits(&self.err_p) == bits(&other.err_p)
            && bits(&self.err_m) == bits(&other.err_m)
            && obits(&self.speeds) == obits(&other.speeds)
            && self.limit_speed.map(f64::to_bits) == other.limit_speed.map(f64::to_bits)
            && self.monitors == other.monitors
            && self.limit_monitor == other.limit_monitor
    }
}

struct LimitSeries {
    norm: Vec<Field>,
    speed: Option<f64>,
    monitor: InvariantMonitor,
}

struct EpsilonResult {
    err_p: f64,
    err_m: f64,
    speed: Option<f64>,
    runtime: f64,
    monitor: InvariantMonitor,
}

fn run_limit(model: &ScaledModel, p_init: Field, solver: &SolverConfig, sweep: &SweepConfig) -> Result<LimitSeries> {
    let dt = solver.dt;
    let mut norm = Vec::new();
    let mut speed_series = Vec::new();
    let run = simulate_limit(model, p_init, solver, 1, |step, p| {
        if sweep.samples_norm(step, dt) {
            norm.push(p.clone());
        }
        if sweep.samples_speed(step, dt) {
            speed_series.push((step as f64 * dt, p.clone()));
        }
        Ok(())
    })?;
    Ok(LimitSeries {
        norm,
        speed: estimate_wave_speed(&speed_series, sweep.speed_level, sweep.speed_window).ok(),
        monitor: run.monitor,
    })
}

fn run_epsilon(
    model: &ScaledModel,
    spec: &InitialDataSpec,
    solver: &SolverConfig,
    sweep: &SweepConfig,
    limit: &LimitSeries,
) -> Result<EpsilonResult> {
    let start = Instant::now();
    let audit = check_assumptions(model, 40)?;
    if !audit.passed() {
        return Err(Error::Domain(format!("structural assumptions fail:\n{audit}")));
    }
    let (state, _) = make_initial_data(model, spec, solver.grid)?;
    let dt = solver.dt;
    let mut acc_p = SpaceTimeNorm::new();
    let mut acc_m = SpaceTimeNorm::new();
    let mut speed_series = Vec::new();
    let run = simulate_system(model, state, solver, 1, |step, _, reduced| {
        let t = step as f64 * dt;
        if sweep.samples_norm(step, dt) {
            let p0 = &limit.norm[step / sweep.norm_every];
            acc_p.push(t, &reduced.p.zip_with(p0, |a, b| a - b)?)?;
            let m = reduced.m.as_ref().ok_or_else(|| Error::Domain("no slow-manifold residual".into()))?;
            acc_m.push(t, m)?;
        }
        if sweep.samples_speed(step, dt) {
            speed_series.push((t, reduced.p.clone()));
        }
        Ok(())
    })?;
    Ok(EpsilonResult {
        err_p: acc_p.finish(sweep.norm_horizon)?,
        err_m: acc_m.finish(sweep.norm_horizon)?,
        speed: estimate_wave_speed(&speed_series, sweep.speed_level, sweep.speed_window).ok(),
        runtime: start.elapsed().as_secs_f64(),
        monitor: run.monitor,
    })
}

/// Solves the limit equation once and the two-population system for every
/// ε, all from the same frequency profile on the same grid and cadence, and
/// tabulates the space-time errors and front speeds. Results are ordered as
/// `sweep.epsilons` whatever the thread count.
pub fn run_convergence_sweep(
    params: WolbachiaParams,
    variant: Variant,
    sweep: &SweepConfig,
    spec: &InitialDataSpec,
    solver: &SolverConfig,
) -> Result<ConvergenceReport> {
    sweep.validate(solver)?;
    solver.validate()?;
    if !variant.has_scalar_limit() {
        return Err(Error::Domain(format!("the {} variant has no scalar limit", variant.name())));
    }
    spec.validate(&solver.grid)?;
    let models = sweep
        .epsilons
        .iter()
        .map(|&eps| ScaledModel::new(params, eps, variant))
        .collect::<Result<Vec<_>>>()?;

    let p_init = Field::from_fn(solver.grid, |x| spec.profile(x));
    let limit = run_limit(&models[0], p_init, solver, sweep)?;

    let job = |model: &ScaledModel| {
        run_epsilon(model, spec, solver, sweep, &limit).map_err(|e| Error::Sweep {
            epsilon: model.epsilon(),
            source: Box::new(e),
        })
    };
    let results: Vec<Result<EpsilonResult>> = if sweep.threads == 0 {
        models.iter().map(job).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(sweep.threads)
            .build()
            .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
        pool.install(|| models.par_iter().map(job).collect())
    };

    let mut report = ConvergenceReport {
        epsilons: sweep.epsilons.clone(),
        err_p: Vec::new(),
        err_m: Vec::new(),
        speeds: Vec::new(),
        limit_speed: limit.speed,
        runtimes: Vec::new(),
        monitors: Vec::new(),
        limit_monitor: limit.monitor,
    };
    for r in results {
        let r = r?;
        report.err_p.push(r.err_p);
        report.err_m.push(r.err_m);
        report.speeds.push(r.speed);
        report.runtimes.push(r.runtime);
        report.monitors.push(r.monitor);
    }
    Ok(report)
}
