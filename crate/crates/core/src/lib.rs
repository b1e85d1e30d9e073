//! Wolbachia two-population reaction-diffusion systems, their scalar
//! bistable limit as the competition scale `ε → 0`, and a harness that
//! measures the convergence numerically.

pub mod config;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod model;
pub mod output;
pub mod reduction;

pub use config::{parse_config, RunConfig};
pub use error::{Error, Result};
pub use experiments::{ConvergenceReport, InitialDataSpec, SweepConfig};
pub use grid::{Field, Grid1D, SolverConfig};
pub use model::{ScaledModel, Variant, WolbachiaParams};
pub use reduction::{PopulationState, ReducedFields};
