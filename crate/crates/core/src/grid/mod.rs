//! One-dimensional grids, fields on them, and the semi-implicit integrator.

mod norms;
mod solver;
mod tridiag;

pub use norms::{l2_space, l2_spacetime, mass, SpaceTimeNorm};
pub use solver::{
    assemble_diffusion, step_scalar, step_system, Boundary, DiffusionOperator, ScalarStepper,
    SolverConfig, StepDiagnostics, SystemStepper, CLAMP_THRESHOLD,
};
pub use tridiag::{tridiagonal_solve, TridiagonalSystem};

use crate::error::{Error, Result};

/// Uniform vertex-centred grid on `[xmin, xmax]` with `nx` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    xmin: f64,
    xmax: f64,
    nx: usize,
    dx: f64,
}

impl Grid1D {
    pub fn new(xmin: f64, xmax: f64, nx: usize) -> Result<Self> {
        if !(xmin.is_finite() && xmax.is_finite() && xmax > xmin) {
            return Err(Error::param("xmax", format!("empty domain [{xmin}, {xmax}]")));
        }
        if nx < 3 {
            return Err(Error::param("nx", format!("{nx} points, need at least 3")));
        }
        Ok(Self {
            xmin,
            xmax,
            nx,
            dx: (xmax - xmin) / (nx - 1) as f64,
        })
    }

    /// Grid with spacing `dx`, which must divide the domain length.
    pub fn with_spacing(xmin: f64, xmax: f64, dx: f64) -> Result<Self> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::param("dx", format!("spacing {dx} must be positive")));
        }
        let cells = ((xmax - xmin) / dx).round();
        if !(cells >= 2.0 && cells < 1e8) {
            return Err(Error::param("dx", format!("spacing {dx} gives {cells} cells")));
        }
        let grid = Self::new(xmin, xmax, cells as usize + 1)?;
        if ((grid.dx - dx) / dx).abs() > 1e-9 {
            return Err(Error::param(
                "dx",
                format!("spacing {dx} does not divide [{xmin}, {xmax}]"),
            ));
        }
        Ok(grid)
    }

    pub fn xmin(&self) -> f64 {
        self.xmin
    }

    pub fn xmax(&self) -> f64 {
        self.xmax
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.nx {
            self.xmax
        } else {
            self.xmin + i as f64 * self.dx
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.nx).map(move |i| self.x(i))
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.xmin + self.xmax)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.xmax - self.xmin)
    }
}

/// Grid function: one finite value per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid1D,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.nx() {
            return Err(Error::Mismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.nx()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite value {} at index {i}", values[i])));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Grid1D, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.nx()],
        }
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid,
            values: grid.points().map(f).collect(),
        }
    }

    /// Internal constructor for values already known to be finite.
    pub(crate) fn from_values(grid: Grid1D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.nx());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        if self.grid != other.grid {
            return Err(Error::Mismatch("fields live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Field::new(self.grid, values)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Field> {
        Field::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid() {
        let g = Grid1D::with_spacing(-15.0, 15.0, 0.05).unwrap();
        assert_eq!(g.nx(), 601);
        assert!((g.dx() - 0.05).abs() < 1e-12 * 0.05);
        assert_eq!(g.x(0), -15.0);
        assert_eq!(g.x(600), 15.0);
        assert!(g.x(300).abs() < 1e-12);
    }

    #[test]
    fn grid_rejections() {
        assert!(Grid1D::new(1.0, 1.0, 10).is_err());
        assert!(Grid1D::new(0.0, 1.0, 2).is_err());
        assert!(Grid1D::with_spacing(0.0, 1.0, 0.3).is_err());
        assert!(Grid1D::with_spacing(0.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn field_validation() {
        let g = Grid1D::new(0.0, 1.0, 5).unwrap();
        assert!(Field::new(g, vec![0.0; 4]).is_err());
        assert!(Field::new(g, vec![0.0, 1.0, f64::NAN, 0.0, 0.0]).is_err());
        let other = Grid1D::new(0.0, 2.0, 5).unwrap();
        let a = Field::constant(g, 1.0);
        assert!(a.zip_with(&Field::constant(other, 1.0), |x, y| x + y).is_err());
    }
}
