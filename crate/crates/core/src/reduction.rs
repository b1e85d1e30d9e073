//! Reduced variables `(n, p, M)` of a primitive state, the space-time error
//! norms of the singular limit, and runtime invariant monitoring.

use crate::error::{Error, Result};
use crate::grid::{l2_spacetime, Field, Grid1D, CLAMP_THRESHOLD};
use crate::model::ScaledModel;

/// Primitive two-population state: infected `n_i` and uninfected `n_u`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationState {
    pub ni: Field,
    pub nu: Field,
    /// Time (day).
    pub time: f64,
}

impl PopulationState {
    pub fn new(ni: Field, nu: Field, time: f64) -> Result<Self> {
        if ni.grid() != nu.grid() {
            return Err(Error::Mismatch("n_i and n_u live on different grids".into()));
        }
        let state = Self { ni, nu, time };
        state.check_non_negative()?;
        Ok(state)
    }

    pub fn grid(&self) -> &Grid1D {
        self.ni.grid()
    }

    pub fn min_density(&self) -> f64 {
        self.ni.min().min(self.nu.min())
    }

    fn check_non_negative(&self) -> Result<()> {
        for (name, f) in [("n_i", &self.ni), ("n_u", &self.nu)] {
            if let Some(i) = f.values().iter().position(|&v| v < 0.0) {
                return Err(Error::Domain(format!(
                    "negative density {name} = {} at x = {} (t = {})",
                    f.values()[i],
                    f.grid().x(i),
                    self.time
                )));
            }
        }
        Ok(())
    }
}

/// Reduced total population `n`, frequency `p`, and distance to the slow
/// manifold `m = n − h(p)`. `m` is absent for the alternative scaling, which
/// has no slow manifold in the same sense.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedFields {
    pub n: Field,
    pub p: Field,
    pub m: Option<Field>,
    pub time: f64,
}

/// Maps a primitive state to reduced variables; `p = 0` where both
/// densities vanish.
pub fn to_reduced(model: &ScaledModel, state: &PopulationState) -> Result<ReducedFields> {
    if state.ni.grid() != state.nu.grid() {
        return Err(Error::Mismatch("n_i and n_u live on different grids".into()));
    }
    state.check_non_negative()?;
    let grid = *state.grid();
    let (ni, nu) = (state.ni.values(), state.nu.values());
    let mut n = Vec::with_capacity(ni.len());
    let mut p = Vec::with_capacity(ni.len());
    for (&a, &b) in ni.iter().zip(nu) {
        let total = a + b;
        n.push(model.reduced_density(total));
        p.push(if total > 0.0 { a / total } else { 0.0 });
    }
    let m = model.variant().has_scalar_limit().then(|| {
        let m = n.iter().zip(&p).map(|(&n, &p)| n - model.h_raw(p)).collect();
        Field::from_values(grid, m)
    });
    Ok(ReducedFields {
        n: Field::new(grid, n)?,
        p: Field::new(grid, p)?,
        m,
        time: state.time,
    })
}

/// Inverse of [`to_reduced`] on `(n, p)`.
pub fn from_reduced(model: &ScaledModel, n: &Field, p: &Field, time: f64) -> Result<PopulationState> {
    let total = n.map(|v| model.total_from_reduced(v))?;
    let ni = total.zip_with(p, |t, q| q * t)?;
    let nu = total.zip_with(p, |t, q| (1.0 - q) * t)?;
    PopulationState::new(ni, nu, time)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    /// `‖p^ε − p⁰‖` in `L²(0, T; L²)`.
    pub err_p: f64,
    /// `‖n^ε − h(p^ε)‖` in `L²(0, T; L²)`.
    pub err_m: f64,
}

fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(1.0)
}

/// Space-time errors between a reduced system trajectory and a limit
/// trajectory sampled on the same grid at the same times, up to `t_end`.
pub fn error_norms(reduced_series: &[ReducedFields], limit_series: &[(f64, Field)], t_end: f64) -> Result<ErrorNorms> {
    if reduced_series.len() != limit_series.len() {
        return Err(Error::Mismatch(format!(
            "{} reduced snapshots vs {} limit snapshots",
            reduced_series.len(),
            limit_series.len()
        )));
    }
    let mut dp = Vec::with_capacity(reduced_series.len());
    let mut m = Vec::with_capacity(reduced_series.len());
    for (k, (r, (t, p0))) in reduced_series.iter().zip(limit_series).enumerate() {
        if !same_time(r.time, *t) {
            return Err(Error::Mismatch(format!("snapshot {k}: t = {} vs {t}", r.time)));
        }
        if r.p.grid() != p0.grid() {
            return Err(Error::Mismatch(format!("snapshot {k}: grids differ")));
        }
        let residual = r
            .m
            .clone()
            .ok_or_else(|| Error::Mismatch("reduced fields carry no slow-manifold residual".into()))?;
        dp.push((*t, r.p.zip_with(p0, |a, b| a - b)?));
        m.push((*t, residual));
    }
    Ok(ErrorNorms {
        err_p: l2_spacetime(&dp, t_end)?,
        err_m: l2_spacetime(&m, t_end)?,
    })
}

/// `max_p h(p)` sampled at 10001 frequencies.
pub fn slow_manifold_max(model: &ScaledModel) -> f64 {
    (0..=10_000)
        .map(|k| model.h_raw(k as f64 / 10_000.0))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Running record of the positivity, frequency and upper-density bounds
/// along one simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantMonitor {
    /// Upper bound for `n`: `max(max_p h(p), max_x n_init) + 1e-6`.
    pub n_bound: f64,
    pub min_density: f64,
    pub min_p: f64,
    pub max_p: f64,
    pub max_n: f64,
    pub samples: usize,
}

impl InvariantMonitor {
    pub fn new(model: &ScaledModel, initial: &ReducedFields) -> Self {
        Self {
            n_bound: slow_manifold_max(model).max(initial.n.max()) + 1e-6,
            min_density: f64::INFINITY,
            min_p: f64::INFINITY,
            max_p: f64::NEG_INFINITY,
            max_n: f64::NEG_INFINITY,
            samples: 0,
        }
    }

    pub fn observe(&mut self, state: &PopulationState, reduced: &ReducedFields) {
        self.min_density = self.min_density.min(state.min_density());
        self.min_p = self.min_p.min(reduced.p.min());
        self.max_p = self.max_p.max(reduced.p.max());
        self.max_n = self.max_n.max(reduced.n.max());
        self.samples += 1;
    }

    /// Records a scalar frequency field (limit equation).
    pub fn observe_frequency(&mut self, p: &Field) {
        self.min_p = self.min_p.min(p.min());
        self.max_p = self.max_p.max(p.max());
        self.samples += 1;
    }

    pub fn densities_ok(&self) -> bool {
        self.min_density >= -CLAMP_THRESHOLD
    }

    pub fn frequencies_ok(&self) -> bool {
        self.min_p >= -CLAMP_THRESHOLD && self.max_p <= 1.0 + CLAMP_THRESHOLD
    }

    pub fn density_bound_ok(&self) -> bool {
        self.max_n <= self.n_bound
    }

    pub fn holds(&self) -> bool {
        self.densities_ok() && self.frequencies_ok() && self.density_bound_ok()
    }
}

impl Default for InvariantMonitor {
    /// A monitor with no density bound, for scalar runs.
    fn default() -> Self {
        Self {
            n_bound: f64::INFINITY,
            min_density: f64::INFINITY,
            min_p: f64::INFINITY,
            max_p: f64::NEG_INFINITY,
            max_n: f64::NEG_INFINITY,
            samples: 0,
        }
    }
}

impl std::fmt::Display for InvariantMonitor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} samples: min density {:.3e}, p in [{:.3e}, {:.15}], max n {:.6} (bound {:.6})",
            self.samples, self.min_density, self.min_p, self.max_p, self.max_n, self.n_bound
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{equilibria, Variant, WolbachiaParams};
    use proptest::prelude::*;

    fn fig1() -> ScaledModel {
        ScaledModel::new(WolbachiaParams::figure1(), 0.1, Variant::PerfectTransmission).unwrap()
    }

    fn grid() -> Grid1D {
        Grid1D::new(-1.0, 1.0, 21).unwrap()
    }

    fn uniform(ni: f64, nu: f64) -> PopulationState {
        PopulationState::new(Field::constant(grid(), ni), Field::constant(grid(), nu), 0.0).unwrap()
    }

    #[test]
    fn extinction_state_sits_at_h0() {
        let m = fig1();
        let r = to_reduced(&m, &uniform(0.0, m.extinction_total())).unwrap();
        for ((&n, &p), &res) in r.n.values().iter().zip(r.p.values()).zip(r.m.unwrap().values()) {
            assert!((n - 0.241_071_428_571).abs() < 1e-9);
            assert_eq!(p, 0.0);
            assert!(res.abs() < 1e-12);
        }
    }

    #[test]
    fn equal_densities_give_half() {
        let r = to_reduced(&fig1(), &uniform(2.0, 2.0)).unwrap();
        assert!(r.p.values().iter().all(|&p| p == 0.5));
    }

    #[test]
    fn vacuum_convention() {
        let r = to_reduced(&fig1(), &uniform(0.0, 0.0)).unwrap();
        assert!(r.p.values().iter().all(|&p| p == 0.0));
        assert!(r.n.values().iter().all(|&n| n == 10.0));
    }

    #[test]
    fn equilibria_lie_on_slow_manifold() {
        let m = fig1();
        for eq in equilibria(&m).unwrap().iter().filter(|e| e.ni + e.nu > 0.0) {
            let r = to_reduced(&m, &uniform(eq.ni, eq.nu)).unwrap();
            assert!(r.m.unwrap().values().iter().all(|v| v.abs() < 1e-9), "{eq:?}");
        }
    }

    #[test]
    fn alternative_scaling_has_no_residual() {
        let m = ScaledModel::new(WolbachiaParams::figure1(), 0.1, Variant::AlternativeScaling).unwrap();
        let r = to_reduced(&m, &uniform(1.0, 2.0)).unwrap();
        assert!(r.m.is_none());
        assert!((r.n.values()[0] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn negative_density_rejected() {
        let mut s = uniform(1.0, 1.0);
        s.nu = Field::new(grid(), (0..21).map(|i| if i == 4 { -1e-3 } else { 1.0 }).collect()).unwrap();
        assert!(to_reduced(&fig1(), &s).is_err());
    }

    #[test]
    fn error_norms_of_identical_series() {
        let m = fig1();
        let series: Vec<_> = (0..3)
            .map(|k| {
                let mut s = uniform(1.0, 3.0);
                s.time = k as f64;
                to_reduced(&m, &s).unwrap()
            })
            .collect();
        let limit: Vec<_> = series.iter().map(|r| (r.time, r.p.clone())).collect();
        let norms = error_norms(&series, &limit, 3.0).unwrap();
        assert_eq!(norms.err_p, 0.0);
        let mval = series[0].m.as_ref().unwrap().values()[0];
        assert!((norms.err_m - mval.abs() * (2.0f64 * 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn error_norm_against_zero_limit() {
        let g = Grid1D::with_spacing(-15.0, 15.0, 0.05).unwrap();
        let zero = Field::constant(g, 0.0);
        let series: Vec<_> = [0.0, 1.0, 2.0]
            .iter()
            .map(|&t| ReducedFields {
                n: zero.clone(),
                p: Field::constant(g, 1.0),
                m: Some(zero.clone()),
                time: t,
            })
            .collect();
        let limit: Vec<_> = [0.0, 1.0, 2.0].iter().map(|&t| (t, zero.clone())).collect();
        let norms = error_norms(&series, &limit, 2.0).unwrap();
        assert!((norms.err_p - 60f64.sqrt()).abs() < 1e-10);
        assert_eq!(norms.err_m, 0.0);
    }

    #[test]
    fn error_norms_reject_mismatch() {
        let m = fig1();
        let a = to_reduced(&m, &uniform(1.0, 1.0)).unwrap();
        let mut b = a.clone();
        b.time = 1.0;
        let limit = vec![(0.0, a.p.clone()), (1.5, a.p.clone())];
        assert!(error_norms(&[a.clone(), b.clone()], &limit, 2.0).is_err());
        let other = Grid1D::new(-1.0, 1.0, 11).unwrap();
        let limit = vec![(0.0, a.p.clone()), (1.0, Field::constant(other, 0.5))];
        assert!(error_norms(&[a.clone(), b.clone()], &limit, 2.0).is_err());
        assert!(error_norms(&[a.clone(), b], &limit[..1], 2.0).is_err());
    }

    proptest! {
        #[test]
        fn reduction_is_invertible(
            ni in proptest::collection::vec(0.0f64..12.0, 21),
            nu in proptest::collection::vec(0.0f64..12.0, 21),
            eps in 0.02f64..0.6,
            alt in any::<bool>(),
        ) {
            let variant = if alt { Variant::AlternativeScaling } else { Variant::PerfectTransmission };
            let m = ScaledModel::new(WolbachiaParams::figure1(), eps, variant).unwrap();
            let s = PopulationState::new(Field::new(grid(), ni).unwrap(), Field::new(grid(), nu).unwrap(), 0.0).unwrap();
            let r = to_reduced(&m, &s).unwrap();
            let back = from_reduced(&m, &r.n, &r.p, 0.0).unwrap();
            for k in 0..21 {
                let total = s.ni.values()[k] + s.nu.values()[k];
                prop_assert!((0.0..=1.0).contains(&r.p.values()[k]));
                if total > 0.0 {
                    let scale = total.max(1.0 / eps);
                    prop_assert!((back.ni.values()[k] - s.ni.values()[k]).abs() <= 1e-12 * scale);
                    prop_assert!((back.nu.values()[k] - s.nu.values()[k]).abs() <= 1e-12 * scale);
                }
            }
        }
    }
}
