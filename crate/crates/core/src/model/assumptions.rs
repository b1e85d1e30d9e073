//! Numerical audit of the structural assumptions behind the singular limit.
//!
//! Four checks are sampled:
//!
//! * `interaction`: for `μ = 0`, the quadratic form
//!   `n₁²∂₁f₁ + n₁n₂(∂₂f₁ + ∂₁f₂) + n₂²∂₂f₂ ≤ −B (n₁ + n₂)²` over the triangle
//!   `n₁ + n₂ ≤ 1/(σε)`, with per-capita rates `f_i` differentiated by
//!   central differences and `B` from [`ScaledModel::dn_h_bound`]. For `μ > 0`
//!   the per-capita rate `f₂` is singular at `p = 1`, so `∂ₙH_μ` is sampled
//!   directly at the same points mapped to `(n, p)`.
//! * `boundary`: `n₁f₁ + n₂f₂ < 0` on the hypotenuse `n₁ + n₂ = 1/(σε)`.
//! * `h_zero`: `H(0, p) > 0` at 101 frequencies.
//! * `bistability`: the limit threshold lies in `(0, 1)`.

use super::ScaledModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Worst sampled value: the largest value of the sampled quantity for
    /// `interaction` and `boundary`, the smallest for `h_zero`, the threshold
    /// itself for `bistability`.
    pub worst: f64,
    /// `worst + B` for `interaction`; equal to `worst` elsewhere.
    pub margin: f64,
    /// `(n₁, n₂)` for the triangle checks, `(p, 0)` for the others.
    pub location: [f64; 2],
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub checks: Vec<AssumptionCheck>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl std::fmt::Display for AssumptionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<12} {:<4} worst={:<+.6e} margin={:<+.6e} at ({:.6}, {:.6})  {}",
                c.name,
                if c.passed { "ok" } else { "FAIL" },
                c.worst,
                c.margin,
                c.location[0],
                c.location[1],
                c.detail
            )?;
        }
        Ok(())
    }
}

/// Runs the four checks on a barycentric grid with `samples` intervals per
/// axis (at least 10).
pub fn check_assumptions(model: &ScaledModel, samples: usize) -> Result<AssumptionReport> {
    if samples < 10 {
        return Err(Error::Domain(format!("{samples} samples per axis, need at least 10")));
    }
    Ok(AssumptionReport {
        checks: vec![
            interaction_check(model, samples),
            boundary_check(model, samples),
            h_zero_check(model),
            bistability_check(model),
        ],
    })
}

impl ScaledModel {
    /// Per-capita growth rates `f_i = R_i / n_i` for `μ = 0`.
    fn per_capita(&self, n1: f64, n2: f64) -> (f64, f64) {
        let p = self.params();
        let total = n1 + n2;
        let freq = if total != 0.0 { n1 / total } else { 0.0 };
        let l = self.logistic(total);
        (
            (1.0 - p.sf) * p.fu * l - p.delta * p.du,
            p.fu * (1.0 - p.sh * freq) * l - p.du,
        )
    }

    /// Quadratic form of the sign condition divided by `(n₁ + n₂)²`.
    fn interaction_form(&self, n1: f64, n2: f64) -> f64 {
        let total = n1 + n2;
        let h = 1e-6 * total.max(1.0);
        let (a1, a2) = self.per_capita(n1 + h, n2);
        let (b1, b2) = self.per_capita(n1 - h, n2);
        let (c1, c2) = self.per_capita(n1, n2 + h);
        let (d1, d2) = self.per_capita(n1, n2 - h);
        let d1f1 = (a1 - b1) / (2.0 * h);
        let d1f2 = (a2 - b2) / (2.0 * h);
        let d2f1 = (c1 - d1) / (2.0 * h);
        let d2f2 = (c2 - d2) / (2.0 * h);
        (n1 * n1 * d1f1 + n1 * n2 * (d2f1 + d1f2) + n2 * n2 * d2f2) / (total * total)
    }

    fn dn_h_sampled(&self, n: f64, p: f64) -> f64 {
        let h = 1e-6 * n.abs().max(1.0);
        (self.big_h_raw(n + h, p) - self.big_h_raw(n - h, p)) / (2.0 * h)
    }
}

fn triangle_points(model: &ScaledModel, samples: usize) -> impl Iterator<Item = (f64, f64)> + '_ {
    let cap = model.capacity();
    let s = samples as f64;
    (0..=samples).flat_map(move |i| {
        (0..=samples - i)
            .filter(move |&j| i + j > 0)
            .map(move |j| (cap * i as f64 / s, cap * j as f64 / s))
    })
}

fn interaction_check(model: &ScaledModel, samples: usize) -> AssumptionCheck {
    let bound = model.dn_h_bound();
    let use_form = model.mu_eff() == 0.0;
    let mut worst = f64::NEG_INFINITY;
    let mut location = [f64::NAN; 2];
    for (n1, n2) in triangle_points(model, samples) {
        let value = if use_form {
            model.interaction_form(n1, n2)
        } else {
            let total = n1 + n2;
            model.dn_h_sampled(model.reduced_density(total), n1 / total)
        };
        if value > worst {
            worst = value;
            location = [n1, n2];
        }
    }
    let what = if use_form { "quadratic form / N^2" } else { "dH/dn" };
    match bound {
        Ok(b) => {
            let passed = worst <= -b + 1e-8 * b.max(1.0);
            AssumptionCheck {
                name: "interaction",
                passed,
                worst,
                margin: worst + b,
                location,
                detail: format!("max {what} vs -B = {:.6}", -b),
            }
        }
        Err(e) => AssumptionCheck {
            name: "interaction",
            passed: false,
            worst,
            margin: worst,
            location,
            detail: format!("max {what}; no positive B: {e}"),
        },
    }
}

fn boundary_check(model: &ScaledModel, samples: usize) -> AssumptionCheck {
    let cap = model.capacity();
    let mut worst = f64::NEG_INFINITY;
    let mut location = [f64::NAN; 2];
    for i in 0..=samples {
        let n1 = cap * i as f64 / samples as f64;
        let n2 = cap - n1;
        let (r1, r2) = model.kinetics(n1, n2);
        let value = r1 + r2;
        if value > worst {
            worst = value;
            location = [n1, n2];
        }
    }
    AssumptionCheck {
        name: "boundary",
        passed: worst < 0.0,
        worst,
        margin: worst,
        location,
        detail: format!("max n1 f1 + n2 f2 on n1 + n2 = {cap:.6}"),
    }
}

fn h_zero_check(model: &ScaledModel) -> AssumptionCheck {
    let (worst, p) = (0..=100)
        .map(|k| {
            let p = k as f64 / 100.0;
            (model.big_h_raw(0.0, p), p)
        })
        .fold((f64::INFINITY, f64::NAN), |acc, v| if v.0 < acc.0 { v } else { acc });
    AssumptionCheck {
        name: "h_zero",
        passed: worst > 0.0,
        worst,
        margin: worst,
        location: [p, 0.0],
        detail: "min H(0, p) over 101 samples".into(),
    }
}

fn bistability_check(model: &ScaledModel) -> AssumptionCheck {
    match model.threshold_theta() {
        Ok(theta) => AssumptionCheck {
            name: "bistability",
            passed: theta > 0.0 && theta < 1.0,
            worst: theta,
            margin: theta,
            location: [theta, 0.0],
            detail: "interior threshold of the limit reaction".into(),
        },
        Err(e) => {
            let theta = model.theta_formula();
            AssumptionCheck {
                name: "bistability",
                passed: false,
                worst: theta,
                margin: theta,
                location: [theta, 0.0],
                detail: e.to_string(),
            }
        }
    }
}
