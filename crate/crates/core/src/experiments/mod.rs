//! Reproducible experiments: initial data, ε-sweeps of the convergence
//! errors, front-speed estimation, and the extinction check.

mod initial;
mod simulate;
mod sweep;
mod wave;

pub use initial::{make_initial_data, InitialDataSpec, InitialShape};
pub use simulate::{simulate_limit, simulate_system, LimitRun, SystemRun};
pub use sweep::{run_convergence_sweep, ConvergenceReport, SweepConfig};
pub use wave::{endpoint_drift, estimate_wave_speed, front_positions, rightmost_crossing};

use crate::error::Result;
use crate::grid::{Field, SolverConfig};
use crate::model::ScaledModel;
use crate::reduction::{to_reduced, InvariantMonitor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Invaded,
    Extinct,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtinctionOutcome {
    pub verdict: Verdict,
    /// `max_x p(t_end)`.
    pub max_p: f64,
    /// `min p(t_end)` over the support of the initial bump.
    pub min_p_support: f64,
    pub monitor: InvariantMonitor,
}

const EXTINCT_BELOW: f64 = 0.1;
const INVADED_ABOVE: f64 = 0.9;

fn classify(p: &Field, spec: &InitialDataSpec, monitor: InvariantMonitor) -> ExtinctionOutcome {
    let grid = p.grid();
    let max_p = p.max();
    let min_p_support = p
        .values()
        .iter()
        .enumerate()
        .filter(|(i, _)| spec.in_support(grid.x(*i)))
        .map(|(_, &v)| v)
        .fold(f64::INFINITY, f64::min);
    let verdict = if max_p < EXTINCT_BELOW {
        Verdict::Extinct
    } else if min_p_support > INVADED_ABOVE {
        Verdict::Invaded
    } else {
        Verdict::Undecided
    };
    ExtinctionOutcome {
        verdict,
        max_p,
        min_p_support,
        monitor,
    }
}

/// Runs the two-population system from the bump to `config.t_end`:
/// extinct if `max p < 0.1`, invaded if `p > 0.9` on the whole initial
/// support, undecided otherwise.
pub fn extinction_check(model: &ScaledModel, spec: &InitialDataSpec, config: &SolverConfig) -> Result<ExtinctionOutcome> {
    let (state, _) = make_initial_data(model, spec, config.grid)?;
    let run = simulate_system(model, state, config, config.output_every, |_, _, _| Ok(()))?;
    let p = to_reduced(model, &run.final_state)?.p;
    Ok(classify(&p, spec, run.monitor))
}

/// Same verdict for the scalar limit equation started from the bump.
pub fn limit_extinction_check(
    model: &ScaledModel,
    spec: &InitialDataSpec,
    config: &SolverConfig,
) -> Result<ExtinctionOutcome> {
    spec.validate(&config.grid)?;
    let p_init = Field::from_fn(config.grid, |x| spec.profile(x));
    let run = simulate_limit(model, p_init, config, config.output_every, |_, _| Ok(()))?;
    Ok(classify(&run.final_p, spec, run.monitor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use crate::model::{Variant, WolbachiaParams};

    fn config(t_end: f64) -> SolverConfig {
        let grid = Grid1D::with_spacing(-15.0, 15.0, 0.05).unwrap();
        SolverConfig::new(grid, 0.005, t_end, 0.1).unwrap()
    }

    #[test]
    fn sub_threshold_limit_data_dies_out() {
        let m = ScaledModel::new(WolbachiaParams::figure1(), 0.1, Variant::PerfectTransmission).unwrap();
        let out = limit_extinction_check(&m, &InitialDataSpec::plateau(0.05, 2.0, 0.5), &config(50.0)).unwrap();
        assert_eq!(out.verdict, Verdict::Extinct, "{out:?}");
        assert!(out.monitor.frequencies_ok());
    }

    #[test]
    fn classification_thresholds() {
        let grid = Grid1D::new(-5.0, 5.0, 101).unwrap();
        let spec = InitialDataSpec::plateau(0.8, 1.0, 0.5);
        let mon = InvariantMonitor::default();
        assert_eq!(classify(&Field::constant(grid, 0.05), &spec, mon).verdict, Verdict::Extinct);
        assert_eq!(classify(&Field::constant(grid, 0.95), &spec, mon).verdict, Verdict::Invaded);
        assert_eq!(classify(&Field::constant(grid, 0.5), &spec, mon).verdict, Verdict::Undecided);
        let partial = Field::from_fn(grid, |x| if x.abs() < 1.0 { 0.95 } else { 0.5 });
        assert_eq!(classify(&partial, &spec, mon).verdict, Verdict::Undecided);
    }

    #[test]
    fn alternative_scaling_has_no_limit_run() {
        let m = ScaledModel::new(WolbachiaParams::figure1(), 0.1, Variant::AlternativeScaling).unwrap();
        let p = Field::constant(config(1.0).grid, 0.5);
        assert!(simulate_limit(&m, p, &config(1.0), 1, |_, _| Ok(())).is_err());
    }

    #[test]
    fn sweep_validation() {
        let solver = config(25.0);
        let mut s = SweepConfig::figure1();
        s.validate(&solver).unwrap();
        s.epsilons = vec![0.1, 0.3];
        assert!(s.validate(&solver).is_err());
        s.epsilons = vec![];
        assert!(s.validate(&solver).is_err());
        let mut s = SweepConfig::figure1();
        s.norm_horizon = 30.0;
        assert!(s.validate(&solver).is_err());
    }
}
