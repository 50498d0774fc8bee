//! Periodic pseudo-spectral solver for the full nonlinear system around a
//! constant state, with the diagnostic suite.

pub mod config;
pub mod diagnostics;
pub mod io;
pub mod probes;
pub mod run;
pub mod solver;

pub use config::{InitialCondition, SimConfig, StepPlan, CFL_MAX};
pub use diagnostics::{
    besov_norms, constraint_residual, manifold_residual, manifold_residual_of_perturbation, w1inf, ConstraintResidual,
    DiagnosticsSample, DiagnosticsSeries, ManifoldResidual, SERIES_COLUMNS,
};
pub use probes::{
    dispersion_probe, energy_growth_check, self_convergence, u0_smallness_probe, ConvergenceReport, DecayReport,
    DispersionConfig, EnergyReport, U0Report,
};
pub use run::{initial_field, simulate, simulate_from, simulate_observed, RunSummary, SimRun};
pub use solver::{rhs, step_rk4, Solver};
