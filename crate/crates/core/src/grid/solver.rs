//! Semi-implicit time stepping: explicit forward-Euler reaction evaluated at
//! the beginning of the step, then one implicit diffusion solve
//! `(I − dt L_h) u^{k+1} = u^k + dt R(u^k)` per species.
//!
//! `L_h` is the conservative three-point stencil for `∂ₓ(a(x) ∂ₓ u)` with
//! arithmetic-mean face diffusivities. Under Neumann closure the ghost value
//! mirrors the first interior node about the boundary node, which keeps
//! constants invariant and conserves the trapezoidal mass exactly.

use super::{Field, Grid1D, TridiagonalSystem};
use crate::error::{Error, Result};
use crate::model::ScaledModel;
use crate::reduction::PopulationState;

/// Round-off band below zero (or above one for frequencies) that is clamped
/// silently; larger excursions are counted in [`StepDiagnostics`].
pub const CLAMP_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Zero flux.
    #[default]
    Neumann,
    /// Boundary values held at their initial values.
    Dirichlet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub grid: Grid1D,
    /// Time step (day).
    pub dt: f64,
    /// Horizon (day).
    pub t_end: f64,
    /// Diffusivity `a(x)` sampled at the grid points.
    pub diffusivity: Vec<f64>,
    /// Snapshot cadence in steps.
    pub output_every: usize,
    pub clip_negatives: bool,
    pub boundary: Boundary,
}

impl SolverConfig {
    /// Constant diffusivity `a`, Neumann boundaries, snapshots at the first
    /// and last step only.
    pub fn new(grid: Grid1D, dt: f64, t_end: f64, a: f64) -> Result<Self> {
        let steps = (t_end / dt).round().max(1.0) as usize;
        let config = Self {
            grid,
            dt,
            t_end,
            diffusivity: vec![a; grid.nx()],
            output_every: steps,
            clip_negatives: true,
            boundary: Boundary::Neumann,
        };
        config.validate()?;
        Ok(config)
    }

    /// Domain `[-15, 15]`, `dx = 0.05`, `dt = 0.005`, `a ≡ 0.1`, horizon 125
    /// days, snapshots every 5000 steps.
    pub fn figure1() -> Self {
        let grid = Grid1D::with_spacing(-15.0, 15.0, 0.05).expect("static grid");
        Self {
            output_every: 5000,
            ..Self::new(grid, 0.005, 125.0, 0.1).expect("static config")
        }
    }

    pub fn with_output_every(mut self, every: usize) -> Self {
        self.output_every = every;
        self
    }

    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.t_end = t_end;
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_diffusivity(mut self, diffusivity: Vec<f64>) -> Self {
        self.diffusivity = diffusivity;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::param("dt", format!("time step {} must be positive", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= self.dt) {
            return Err(Error::param(
                "t_end",
                format!("horizon {} shorter than one step {}", self.t_end, self.dt),
            ));
        }
        let steps = (self.t_end / self.dt).round();
        if (steps * self.dt - self.t_end).abs() > 1e-9 * self.t_end {
            return Err(Error::param(
                "t_end",
                format!("horizon {} is not a multiple of dt = {}", self.t_end, self.dt),
            ));
        }
        if self.output_every == 0 {
            return Err(Error::param("output_every", "snapshot cadence must be at least 1"));
        }
        if self.diffusivity.len() != self.grid.nx() {
            return Err(Error::param(
                "diffusivity",
                format!("{} samples for {} grid points", self.diffusivity.len(), self.grid.nx()),
            ));
        }
        let min = self.diffusivity.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min > 0.0) || self.diffusivity.iter().any(|a| !a.is_finite()) {
            return Err(Error::param(
                "diffusivity",
                format!("diffusivity must be finite and bounded below by a positive constant (min {min})"),
            ));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn time_at(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }
}

/// Builds `I − dt L_h` (with a zero right-hand side).
pub fn assemble_diffusion(config: &SolverConfig) -> Result<TridiagonalSystem> {
    config.validate()?;
    let n = config.grid.nx();
    let dx = config.grid.dx();
    let r = config.dt / (dx * dx);
    let a = &config.diffusivity;
    let coef: Vec<f64> = (0..n - 1).map(|i| r * 0.5 * (a[i] + a[i + 1])).collect();

    let mut lower = vec![0.0; n - 1];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n - 1];
    for i in 1..n - 1 {
        lower[i - 1] = -coef[i - 1];
        diag[i] = 1.0 + coef[i - 1] + coef[i];
        upper[i] = -coef[i];
    }
    match config.boundary {
        Boundary::Neumann => {
            diag[0] = 1.0 + 2.0 * coef[0];
            upper[0] = -2.0 * coef[0];
            diag[n - 1] = 1.0 + 2.0 * coef[n - 2];
            lower[n - 2] = -2.0 * coef[n - 2];
        }
        Boundary::Dirichlet => {
            diag[0] = 1.0;
            upper[0] = 0.0;
            diag[n - 1] = 1.0;
            lower[n - 2] = 0.0;
        }
    }
    Ok(TridiagonalSystem {
        lower,
        diag,
        upper,
        rhs: vec![0.0; n],
    })
}

/// The implicit diffusion matrix with its elimination factors cached for
/// repeated solves. Produces the same bits as [`super::tridiagonal_solve`].
#[derive(Debug, Clone)]
pub struct DiffusionOperator {
    lower: Vec<f64>,
    pivot: Vec<f64>,
    ratio: Vec<f64>,
    boundary: Boundary,
}

impl DiffusionOperator {
    pub fn new(config: &SolverConfig) -> Result<Self> {
        let sys = assemble_diffusion(config)?;
        let n = sys.len();
        let mut pivot = vec![0.0; n];
        let mut ratio = vec![0.0; n];
        pivot[0] = sys.diag[0];
        for i in 0..n {
            if i > 0 {
                pivot[i] = sys.diag[i] - sys.lower[i - 1] * ratio[i - 1];
            }
            if pivot[i] == 0.0 {
                return Err(Error::ZeroPivot { row: i });
            }
            if i + 1 < n {
                ratio[i] = sys.upper[i] / pivot[i];
            }
        }
        Ok(Self {
            lower: sys.lower,
            pivot,
            ratio,
            boundary: config.boundary,
        })
    }

    pub fn solve_in_place(&self, u: &mut [f64]) {
        let n = u.len();
        debug_assert_eq!(n, self.pivot.len());
        u[0] /= self.pivot[0];
        for i in 1..n {
            u[i] = (u[i] - self.lower[i - 1] * u[i - 1]) / self.pivot[i];
        }
        for i in (0..n - 1).rev() {
            u[i] -= self.ratio[i] * u[i + 1];
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepDiagnostics {
    /// Values pulled back into range from within [`CLAMP_THRESHOLD`].
    pub clamped: usize,
    /// Values found outside range by more than [`CLAMP_THRESHOLD`].
    pub excursions: usize,
    /// Largest distance outside the admissible range seen so far.
    pub worst_excursion: f64,
}

impl StepDiagnostics {
    fn inspect(&mut self, v: &mut f64, lo: f64, hi: Option<f64>, clamp: bool) {
        let below = lo - *v;
        let above = hi.map_or(f64::NEG_INFINITY, |h| *v - h);
        let out = below.max(above);
        if out <= 0.0 {
            return;
        }
        self.worst_excursion = self.worst_excursion.max(out);
        if out <= CLAMP_THRESHOLD {
            if clamp {
                *v = if below > 0.0 { lo } else { hi.unwrap_or(*v) };
                self.clamped += 1;
            }
        } else {
            self.excursions += 1;
        }
    }
}

fn pin_ends(u: &mut [f64], ends: Option<(f64, f64)>) {
    if let Some((a, b)) = ends {
        let n = u.len();
        u[0] = a;
        u[n - 1] = b;
    }
}

/// Integrates one of the two-population systems in primitive variables.
#[derive(Debug, Clone)]
pub struct SystemStepper {
    model: ScaledModel,
    dt: f64,
    clip: bool,
    op: DiffusionOperator,
    step: usize,
    diagnostics: StepDiagnostics,
}

impl SystemStepper {
    pub fn new(model: ScaledModel, config: &SolverConfig) -> Result<Self> {
        Ok(Self {
            model,
            dt: config.dt,
            clip: config.clip_negatives,
            op: DiffusionOperator::new(config)?,
            step: 0,
            diagnostics: StepDiagnostics::default(),
        })
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    pub fn diagnostics(&self) -> &StepDiagnostics {
        &self.diagnostics
    }

    pub fn step(&mut self, state: &mut PopulationState) -> Result<()> {
        let dt = self.dt;
        let dirichlet = self.op.boundary == Boundary::Dirichlet;
        let ni = state.ni.values_mut();
        let n = ni.len();
        let ends_i = dirichlet.then(|| (ni[0], ni[n - 1]));
        let nu = state.nu.values_mut();
        let ends_u = dirichlet.then(|| (nu[0], nu[n - 1]));

        let ni = state.ni.values_mut();
        let nu = state.nu.values_mut();
        for (a, b) in ni.iter_mut().zip(nu.iter_mut()) {
            let (ra, rb) = self.model.kinetics(*a, *b);
            *a += dt * ra;
            *b += dt * rb;
        }
        pin_ends(ni, ends_i);
        pin_ends(nu, ends_u);
        self.op.solve_in_place(ni);
        self.op.solve_in_place(nu);

        self.step += 1;
        for v in ni.iter_mut().chain(nu.iter_mut()) {
            if !v.is_finite() {
                return Err(Error::NonFinite { step: self.step });
            }
            self.diagnostics.inspect(v, 0.0, None, self.clip);
        }
        state.time = self.step as f64 * dt;
        Ok(())
    }

    /// Advances `steps` steps, calling `observe` on the initial state, every
    /// `every` steps, and on the final state.
    pub fn run(
        &mut self,
        state: &mut PopulationState,
        steps: usize,
        every: usize,
        mut observe: impl FnMut(usize, &PopulationState) -> Result<()>,
    ) -> Result<()> {
        let every = every.max(1);
        observe(self.step, state)?;
        for k in 1..=steps {
            self.step(state)?;
            if k % every == 0 || k == steps {
                observe(self.step, state)?;
            }
        }
        Ok(())
    }
}

/// Integrates the scalar equation `∂ₜp − ∂ₓ(a ∂ₓp) = r(p)`.
#[derive(Debug, Clone)]
pub struct ScalarStepper<R> {
    reaction: R,
    dt: f64,
    op: DiffusionOperator,
    step: usize,
    diagnostics: StepDiagnostics,
}

impl<R: Fn(f64) -> f64> ScalarStepper<R> {
    pub fn new(reaction: R, config: &SolverConfig) -> Result<Self> {
        Ok(Self {
            reaction,
            dt: config.dt,
            op: DiffusionOperator::new(config)?,
            step: 0,
            diagnostics: StepDiagnostics::default(),
        })
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    pub fn diagnostics(&self) -> &StepDiagnostics {
        &self.diagnostics
    }

    pub fn step(&mut self, p: &mut Field) -> Result<()> {
        let dt = self.dt;
        let u = p.values_mut();
        let n = u.len();
        let ends = (self.op.boundary == Boundary::Dirichlet).then(|| (u[0], u[n - 1]));
        for v in u.iter_mut() {
            *v += dt * (self.reaction)(*v);
        }
        pin_ends(u, ends);
        self.op.solve_in_place(u);

        self.step += 1;
        for v in u.iter_mut() {
            if !v.is_finite() {
                return Err(Error::NonFinite { step: self.step });
            }
            self.diagnostics.inspect(v, 0.0, Some(1.0), true);
        }
        Ok(())
    }

    /// Same cadence contract as [`SystemStepper::run`]; `observe` receives the
    /// step index and the field.
    pub fn run(
        &mut self,
        p: &mut Field,
        steps: usize,
        every: usize,
        mut observe: impl FnMut(usize, &Field) -> Result<()>,
    ) -> Result<()> {
        let every = every.max(1);
        observe(self.step, p)?;
        for k in 1..=steps {
            self.step(p)?;
            if k % every == 0 || k == steps {
                observe(self.step, p)?;
            }
        }
        Ok(())
    }
}

/// One semi-implicit step of the two-population system.
pub fn step_system(model: &ScaledModel, state: &PopulationState, config: &SolverConfig) -> Result<PopulationState> {
    let mut next = state.clone();
    let mut stepper = SystemStepper::new(*model, config)?;
    stepper.step(&mut next)?;
    next.time = state.time + config.dt;
    Ok(next)
}

/// One semi-implicit step of the scalar equation with reaction `r`.
pub fn step_scalar(reaction: impl Fn(f64) -> f64, p: &Field, config: &SolverConfig) -> Result<Field> {
    let mut next = p.clone();
    ScalarStepper::new(reaction, config)?.step(&mut next)?;
    Ok(next)
}
