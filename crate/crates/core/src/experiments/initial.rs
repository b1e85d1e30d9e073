use crate::error::{Error, Result};
use crate::grid::{Field, Grid1D};
use crate::model::ScaledModel;
use crate::reduction::PopulationState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialShape {
    /// Flat top on `|x| ≤ radius`, linear ramp to zero over `smoothing`.
    #[default]
    PlateauBump,
}

/// Compactly supported initial frequency profile centred at `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialDataSpec {
    pub shape: InitialShape,
    /// Peak frequency, in `(0, 1)`.
    pub amplitude: f64,
    /// Half-width of the plateau.
    pub radius: f64,
    /// Width of the ramp.
    pub smoothing: f64,
}

impl InitialDataSpec {
    pub fn plateau(amplitude: f64, radius: f64, smoothing: f64) -> Self {
        Self {
            shape: InitialShape::PlateauBump,
            amplitude,
            radius,
            smoothing,
        }
    }

    /// Invading-front experiment.
    pub fn figure1() -> Self {
        Self::plateau(0.8, 0.55, 0.5)
    }

    /// Leaky-transmission experiment.
    pub fn figure2() -> Self {
        Self::plateau(0.5, 1.0, 0.5)
    }

    pub fn validate(&self, grid: &Grid1D) -> Result<()> {
        if !(self.amplitude > 0.0 && self.amplitude < 1.0) {
            return Err(Error::param(
                "amplitude",
                format!("amplitude {} not in (0, 1)", self.amplitude),
            ));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::param("radius", format!("radius {} must be positive", self.radius)));
        }
        if !(self.smoothing >= 0.0 && self.smoothing.is_finite()) {
            return Err(Error::param(
                "smoothing",
                format!("smoothing {} must be non-negative", self.smoothing),
            ));
        }
        let reach = self.radius + self.smoothing;
        let room = grid.xmax().min(-grid.xmin());
        if reach >= room {
            return Err(Error::param(
                "radius",
                format!("bump reaches |x| = {reach}, domain allows less than {room}"),
            ));
        }
        Ok(())
    }

    pub fn profile(&self, x: f64) -> f64 {
        let r = x.abs();
        if r <= self.radius {
            self.amplitude
        } else if r < self.radius + self.smoothing {
            self.amplitude * (1.0 - (r - self.radius) / self.smoothing)
        } else {
            0.0
        }
    }

    /// Whether `x` lies in the support of the profile.
    pub fn in_support(&self, x: f64) -> bool {
        self.profile(x) > 0.0
    }
}

/// Builds `p_init` and a primitive state with frequency `p_init` whose
/// reduced density is `h(0)` everywhere: `n_u = N₀/(1 + φ)`, `n_i = φ n_u`
/// with `φ = p/(1 − p)` and `N₀` the total of the uninfected steady state.
pub fn make_initial_data(model: &ScaledModel, spec: &InitialDataSpec, grid: Grid1D) -> Result<(PopulationState, Field)> {
    spec.validate(&grid)?;
    let total = model.extinction_total();
    if !(total > 0.0) {
        return Err(Error::NoEquilibria(format!(
            "no positive uninfected steady state at epsilon = {}",
            model.epsilon()
        )));
    }
    let p = Field::from_fn(grid, |x| spec.profile(x));
    let nu = p.map(|q| total / (1.0 + q / (1.0 - q)))?;
    let ni = nu.zip_with(&p, |u, q| q / (1.0 - q) * u)?;
    Ok((PopulationState::new(ni, nu, 0.0)?, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Variant, WolbachiaParams};
    use crate::reduction::to_reduced;

    fn grid() -> Grid1D {
        Grid1D::with_spacing(-15.0, 15.0, 0.05).unwrap()
    }

    #[test]
    fn profile_shape() {
        let s = InitialDataSpec::plateau(0.8, 1.0, 0.5);
        assert_eq!(s.profile(0.0), 0.8);
        assert_eq!(s.profile(-1.0), 0.8);
        assert!((s.profile(1.25) - 0.4).abs() < 1e-15);
        assert_eq!(s.profile(1.5), 0.0);
        assert_eq!(InitialDataSpec::plateau(0.8, 1.0, 0.0).profile(1.01), 0.0);
    }

    #[test]
    fn state_reproduces_profile_and_h0() {
        for variant in [Variant::PerfectTransmission, Variant::AlternativeScaling] {
            let m = ScaledModel::new(WolbachiaParams::figure1(), 0.1, variant).unwrap();
            let (state, p) = make_initial_data(&m, &InitialDataSpec::figure1(), grid()).unwrap();
            let r = to_reduced(&m, &state).unwrap();
            let h0 = m.h_of_p(0.0).unwrap();
            for k in 0..p.len() {
                assert!((r.p.values()[k] - p.values()[k]).abs() < 1e-14);
                assert!((r.n.values()[k] - h0).abs() < 1e-12);
            }
            let end = state.nu.values()[0];
            assert_eq!(state.ni.values()[0], 0.0);
            assert!((end - m.extinction_total()).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_specs() {
        let m = ScaledModel::new(WolbachiaParams::figure1(), 0.1, Variant::PerfectTransmission).unwrap();
        for s in [
            InitialDataSpec::plateau(1.0, 1.0, 0.5),
            InitialDataSpec::plateau(0.0, 1.0, 0.5),
            InitialDataSpec::plateau(0.5, 0.0, 0.5),
            InitialDataSpec::plateau(0.5, 1.0, -0.1),
            InitialDataSpec::plateau(0.5, 14.6, 0.5),
        ] {
            assert!(make_initial_data(&m, &s, grid()).is_err(), "{s:?}");
        }
    }
}
