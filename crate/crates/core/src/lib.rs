//! Diffusion-based iteration (D-iteration) for linear fixed-point systems
//! `X = P·X + B` that come from finite-difference stencils.
//!
//! - [`stencil`]: lattice problems, stability checks and system assembly.
//! - [`diffusion`]: the fluid/history iteration with sweep, greedy and custom schedules.
//! - [`catalyst`]: closed-form 1D diffusion limits and exact row relaxation.
//! - [`directional`]: the implicit heat equation and second-order two-point problems
//!   solved one direction at a time.
//! - [`baselines`]: Jacobi, Gauss-Seidel and the Thomas algorithm.
//! - [`problem_file`]: the plain-text problem format.

pub mod baselines;
pub mod catalyst;
pub mod diffusion;
pub mod directional;
pub mod error;
pub mod problem_file;
pub mod report;
pub mod stencil;

pub use catalyst::{apply_profile_row, compute_roots, CatalystProfile, Compensation};
pub use diffusion::{diffuse_site, error_amplification_bound, init_fluid, residual_norm, run, FluidState, Schedule, Strategy};
pub use directional::{
    discretize_ode2, heat_coefficients, solve_heat_directional, solve_ode2, HeatProblem,
    Ode2Problem,
};
pub use error::{Error, Result};
pub use report::{ResidualNorm, SolveReport, TracePoint};
pub use stencil::{
    assemble_system, spectral_radius_estimate, validate_stability, GridProblem, LinearSystem,
    Rect, Site, Stability, StencilWeights,
};
