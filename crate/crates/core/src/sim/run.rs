//! Time integration of a configured run with diagnostics at every sample.

use serde::{Deserialize, Serialize};

use crate::error::{AbiError, Result};
use crate::grid::StateField;
use crate::model::admissible_perturbation;

use super::config::{SimConfig, StepPlan};
use super::diagnostics::{sample, DiagnosticsSeries};
use super::solver::Solver;

/// Outcome of a run. A blow-up ends the run early; everything up to the last
/// good sample is kept. `initial` is the field actually evolved, i.e. the
/// supplied data projected onto the dealiased modes.
#[derive(Clone, Debug)]
pub struct SimRun {
    pub plan: StepPlan,
    pub series: DiagnosticsSeries,
    pub initial: StateField,
    pub final_field: StateField,
    pub final_time: f64,
    pub blowup: Option<AbiError>,
}

/// Summary stored next to run outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub plan: StepPlan,
    pub final_time: f64,
    pub samples: usize,
    pub blowup: Option<String>,
}

impl SimRun {
    pub fn summary(&self) -> RunSummary {
        RunSummary {
            plan: self.plan,
            final_time: self.final_time,
            samples: self.series.samples.len(),
            blowup: self.blowup.as_ref().map(|e| e.to_string()),
        }
    }
}

/// Initial perturbation drawn from the configured seed and profile.
pub fn initial_field(config: &SimConfig) -> Result<StateField> {
    admissible_perturbation(config.seed, config.ic.amplitude, &config.ic.profile, &config.state, &config.grid()?)
}

pub fn simulate(config: &SimConfig) -> Result<SimRun> {
    simulate_observed(config, |_, _| Ok(()))
}

/// Run from the configured initial data, calling `observer(t, u)` at every
/// diagnostic sample (including `t = 0`).
pub fn simulate_observed<F>(config: &SimConfig, observer: F) -> Result<SimRun>
where
    F: FnMut(f64, &StateField) -> Result<()>,
{
    simulate_from(config, initial_field(config)?, observer)
}

/// Run from explicit initial data.
pub fn simulate_from<F>(config: &SimConfig, initial: StateField, mut observer: F) -> Result<SimRun>
where
    F: FnMut(f64, &StateField) -> Result<()>,
{
    let plan = config.plan()?;
    let grid = config.grid()?;
    if initial.grid != grid {
        return Err(AbiError::Config("initial field does not live on the configured grid".into()));
    }
    let solver = Solver::new(grid, config.state, config.dealias)?;
    let initial = solver.project(&initial);
    let mut series = DiagnosticsSeries::default();
    let mut u = initial.clone();
    let mut t = 0.0;
    let mut blowup = None;
    let (s0, w0) = sample(0.0, &u, &config.state, config.sobolev_n)?;
    series.push(s0, w0);
    observer(0.0, &u)?;
    'outer: for i in 0..plan.samples {
        for s in 0..plan.substeps {
            let step = i * plan.substeps + s;
            match solver.step_rk4(&u, plan.dt, step as f64 * plan.dt) {
                Ok(next) => u = next,
                Err(e @ AbiError::BlowUp { .. }) => {
                    series.terminated = Some(e.to_string());
                    blowup = Some(e);
                    break 'outer;
                }
                Err(e) => return Err(e),
            }
        }
        t = (i + 1) as f64 * config.diag_dt;
        let (si, wi) = sample(t, &u, &config.state, config.sobolev_n)?;
        if !si.values().iter().all(|x| x.is_finite()) {
            let e = AbiError::BlowUp { t, what: "non-finite diagnostics".into() };
            series.terminated = Some(e.to_string());
            blowup = Some(e);
            break;
        }
        series.push(si, wi);
        observer(t, &u)?;
    }
    Ok(SimRun { plan, series, initial, final_field: u, final_time: t, blowup })
}
