use crate::error::{Error, Result};
use crate::grid::{Field, ScalarStepper, SolverConfig, StepDiagnostics, SystemStepper};
use crate::model::ScaledModel;
use crate::reduction::{to_reduced, InvariantMonitor, PopulationState, ReducedFields};

#[derive(Debug, Clone)]
pub struct SystemRun {
    pub final_state: PopulationState,
    pub diagnostics: StepDiagnostics,
    /// Bounds checked at every observed step.
    pub monitor: InvariantMonitor,
}

#[derive(Debug, Clone)]
pub struct LimitRun {
    pub final_p: Field,
    pub diagnostics: StepDiagnostics,
    pub monitor: InvariantMonitor,
}

/// Integrates the two-population system over `config.steps()` steps.
/// `observe` receives the step index, the state and its reduced fields at
/// step 0, every `every` steps, and at the last step.
pub fn simulate_system(
    model: &ScaledModel,
    init: PopulationState,
    config: &SolverConfig,
    every: usize,
    mut observe: impl FnMut(usize, &PopulationState, &ReducedFields) -> Result<()>,
) -> Result<SystemRun> {
    let mut stepper = SystemStepper::new(*model, config)?;
    let mut state = init;
    let mut monitor = InvariantMonitor::new(model, &to_reduced(model, &state)?);
    stepper.run(&mut state, config.steps(), every, |step, s| {
        let reduced = to_reduced(model, s)?;
        monitor.observe(s, &reduced);
        observe(step, s, &reduced)
    })?;
    Ok(SystemRun {
        final_state: state,
        diagnostics: *stepper.diagnostics(),
        monitor,
    })
}

/// Integrates the scalar limit equation of `model` from `p_init`, with the
/// same cadence contract as [`simulate_system`].
pub fn simulate_limit(
    model: &ScaledModel,
    p_init: Field,
    config: &SolverConfig,
    every: usize,
    mut observe: impl FnMut(usize, &Field) -> Result<()>,
) -> Result<LimitRun> {
    if !model.variant().has_scalar_limit() {
        return Err(Error::Domain(format!(
            "the {} variant has no scalar limit equation",
            model.variant().name()
        )));
    }
    let m = *model;
    let mut stepper = ScalarStepper::new(move |p| m.limit_rate(p), config)?;
    let mut p = p_init;
    let mut monitor = InvariantMonitor::default();
    stepper.run(&mut p, config.steps(), every, |step, f| {
        monitor.observe_frequency(f);
        observe(step, f)
    })?;
    Ok(LimitRun {
        final_p: p,
        diagnostics: *stepper.diagnostics(),
        monitor,
    })
}
