//! Run configuration and the time-step plan derived from it.

use serde::{Deserialize, Serialize};

use crate::error::{AbiError, Result};
use crate::grid::Grid;
use crate::model::{ConstantState, SpectralProfile};

/// Largest admissible Courant number.
pub const CFL_MAX: f64 = 0.5;

fn default_n() -> usize {
    32
}
fn default_length() -> f64 {
    16.0 * std::f64::consts::PI
}
fn default_cfl() -> f64 {
    0.4
}
fn default_t_end() -> f64 {
    5.0
}
fn default_diag_dt() -> f64 {
    0.25
}
fn default_sobolev_n() -> f64 {
    3.0
}
fn default_true() -> bool {
    true
}
fn default_amplitude() -> f64 {
    1e-2
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialCondition {
    /// Sup norm of the random fields before the lift.
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default)]
    pub profile: SpectralProfile,
}

impl Default for InitialCondition {
    fn default() -> Self {
        Self { amplitude: default_amplitude(), profile: SpectralProfile::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_length")]
    pub length: f64,
    /// Requested step; the default is the CFL step. The step actually used
    /// divides `diag_dt` exactly and never exceeds the request.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default)]
    pub state: ConstantState,
    #[serde(default)]
    pub ic: InitialCondition,
    #[serde(default = "default_true")]
    pub dealias: bool,
    /// Spacing of diagnostic samples; `t_end` must be a multiple of it.
    #[serde(default = "default_diag_dt")]
    pub diag_dt: f64,
    /// Order of the configurable Sobolev norm `H^N`.
    #[serde(default = "default_sobolev_n")]
    pub sobolev_n: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: default_n(),
            length: default_length(),
            dt: None,
            cfl: default_cfl(),
            t_end: default_t_end(),
            state: ConstantState::default(),
            ic: InitialCondition::default(),
            dealias: true,
            diag_dt: default_diag_dt(),
            sobolev_n: default_sobolev_n(),
            seed: 0,
        }
    }
}

/// Steps actually taken: `samples` intervals of `substeps` steps of `dt`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepPlan {
    pub dt: f64,
    pub substeps: usize,
    pub samples: usize,
    pub max_dt: f64,
}

impl SimConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n, self.length)
    }

    pub fn plan(&self) -> Result<StepPlan> {
        let grid = self.grid()?;
        self.state.validate()?;
        let pos = |x: f64| x > 0.0 && x.is_finite();
        if !(self.cfl > 0.0 && self.cfl <= CFL_MAX) {
            return Err(AbiError::Config(format!("cfl must lie in (0, {CFL_MAX}], got {}", self.cfl)));
        }
        if !pos(self.diag_dt) || !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(AbiError::Config("diag_dt must be positive and t_end non-negative".into()));
        }
        if !(self.sobolev_n >= 0.0 && self.sobolev_n.is_finite()) {
            return Err(AbiError::Config("sobolev_n must be non-negative".into()));
        }
        let ratio = self.t_end / self.diag_dt;
        let samples = ratio.round();
        if (ratio - samples).abs() > 1e-9 * ratio.max(1.0) {
            return Err(AbiError::Config(format!(
                "t_end = {} is not a multiple of diag_dt = {}",
                self.t_end, self.diag_dt
            )));
        }
        let speed = self.state.max_wave_speed()?;
        let limit = CFL_MAX * grid.dx() / speed;
        let target = match self.dt {
            Some(dt) if !pos(dt) => return Err(AbiError::Config(format!("dt must be positive, got {dt}"))),
            Some(dt) if dt > limit * (1.0 + 1e-12) => {
                return Err(AbiError::Config(format!("dt = {dt} violates the CFL bound {limit:.6}")))
            }
            Some(dt) => dt,
            None => self.cfl * grid.dx() / speed,
        };
        let substeps = ((self.diag_dt / target) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Ok(StepPlan { dt: self.diag_dt / substeps as f64, substeps, samples: samples as usize, max_dt: limit })
    }
}
