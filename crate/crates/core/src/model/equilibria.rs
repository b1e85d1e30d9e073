use super::ScaledModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    Invasion,
    Extinction,
    Coexistence,
    Origin,
}

impl EquilibriumKind {
    pub fn name(self) -> &'static str {
        match self {
            EquilibriumKind::Invasion => "invasion",
            EquilibriumKind::Extinction => "extinction",
            EquilibriumKind::Coexistence => "coexistence",
            EquilibriumKind::Origin => "origin",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
}

/// Spatially homogeneous steady state `(n_i, n_u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub ni: f64,
    pub nu: f64,
    pub label: EquilibriumKind,
    pub stability: Stability,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityVerdict {
    pub stability: Stability,
    /// Some eigenvalue has `|Re λ| < 1e-8`.
    pub marginal: bool,
    pub eigenvalue_real_parts: [f64; 2],
}

const EQUILIBRIUM_TOL: f64 = 1e-8;
const MARGINAL_TOL: f64 = 1e-8;

/// The four steady states in the non-negative quadrant, in the order
/// invasion, extinction, coexistence, origin, with stability attached.
pub fn equilibria(model: &ScaledModel) -> Result<Vec<Equilibrium>> {
    let params = model.params();
    let extinction_total = model.extinction_total();

    let (theta, invasion_p, invasion_total) = if model.mu_eff() == 0.0 {
        let theta = model.threshold_theta()?;
        // p = 1 and p = θ both sit on F_1 = 0
        let level = params.delta * params.du / ((1.0 - params.sf) * params.fu);
        (theta, 1.0, model.total_for_logistic(level))
    } else {
        let roots = model.mu_roots()?;
        let level = params.delta * params.du / ((1.0 - params.mu) * (1.0 - params.sf) * params.fu);
        (roots.theta, roots.invasion, model.total_for_logistic(level))
    };

    if invasion_total <= 0.0 || extinction_total <= 0.0 {
        return Err(Error::NoEquilibria(format!(
            "epsilon = {} too large: invasion total {invasion_total}, extinction total {extinction_total}",
            model.epsilon()
        )));
    }

    let split = |p: f64, total: f64| (p * total, (1.0 - p) * total);
    let mut out = Vec::with_capacity(4);
    let (ni, nu) = if invasion_p == 1.0 {
        (invasion_total, 0.0)
    } else {
        split(invasion_p, invasion_total)
    };
    out.push((ni, nu, EquilibriumKind::Invasion));
    out.push((0.0, extinction_total, EquilibriumKind::Extinction));
    let (ni, nu) = split(theta, invasion_total);
    out.push((ni, nu, EquilibriumKind::Coexistence));
    out.push((0.0, 0.0, EquilibriumKind::Origin));

    out.into_iter()
        .map(|(ni, nu, label)| {
            let mut eq = Equilibrium {
                ni,
                nu,
                label,
                stability: Stability::Unstable,
            };
            eq.stability = classify_stability(model, &eq)?.stability;
            Ok(eq)
        })
        .collect()
}

/// Linear stability of a steady state of the homogeneous kinetics, from a
/// central finite-difference Jacobian.
pub fn classify_stability(model: &ScaledModel, eq: &Equilibrium) -> Result<StabilityVerdict> {
    let (ni, nu) = (eq.ni, eq.nu);
    let residual = model.kinetic_residual(ni, nu);
    if !(residual <= EQUILIBRIUM_TOL) {
        return Err(Error::NotEquilibrium { ni, nu, residual });
    }

    let h = 1e-6 * (ni.abs() + nu.abs()).max(1.0);
    let d_ni = {
        let (a, b) = (model.kinetics(ni + h, nu), model.kinetics(ni - h, nu));
        ((a.0 - b.0) / (2.0 * h), (a.1 - b.1) / (2.0 * h))
    };
    let d_nu = {
        let (a, b) = (model.kinetics(ni, nu + h), model.kinetics(ni, nu - h));
        ((a.0 - b.0) / (2.0 * h), (a.1 - b.1) / (2.0 * h))
    };
    // [[∂Ri/∂ni, ∂Ri/∂nu], [∂Ru/∂ni, ∂Ru/∂nu]]
    let (j11, j12, j21, j22) = (d_ni.0, d_nu.0, d_ni.1, d_nu.1);
    let trace = j11 + j22;
    let det = j11 * j22 - j12 * j21;
    let disc = trace * trace - 4.0 * det;
    let eigenvalue_real_parts = if disc >= 0.0 {
        let s = disc.sqrt();
        [(trace - s) / 2.0, (trace + s) / 2.0]
    } else {
        [trace / 2.0, trace / 2.0]
    };

    let marginal = eigenvalue_real_parts.iter().any(|re| re.abs() < MARGINAL_TOL);
    let stable = !marginal && eigenvalue_real_parts.iter().all(|&re| re < 0.0);
    Ok(StabilityVerdict {
        stability: if stable {
            Stability::Stable
        } else {
            Stability::Unstable
        },
        marginal,
        eigenvalue_real_parts,
    })
}

impl ScaledModel {
    /// Whether `(ni, nu)` zeroes the kinetics to `tol`, relative to the size
    /// of the birth and death terms.
    pub fn is_equilibrium(&self, ni: f64, nu: f64, tol: f64) -> bool {
        self.kinetic_residual(ni, nu) <= tol
    }

    /// Relative kinetic residual at `(ni, nu)`.
    pub fn equilibrium_residual(&self, ni: f64, nu: f64) -> f64 {
        self.kinetic_residual(ni, nu)
    }
}
