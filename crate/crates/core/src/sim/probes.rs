//! Experiments built on the solver and the linear propagator: quadratic
//! smallness of `u0`, the free dispersion rate, the energy law and RK4
//! self-convergence.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AbiError, Result};
use crate::grid::{Grid, SpectralField, StateField, TAU};
use crate::model::{alpha_beta_delta, norm0, ConstantState};
use crate::spectral::{convention, projector_matrix, Branch};
use crate::NCOMP;

use super::config::{InitialCondition, SimConfig};
use super::diagnostics::DiagnosticsSeries;
use super::run::{simulate, SimRun};

fn finished(run: SimRun) -> Result<SimRun> {
    match run.blowup {
        Some(e) => Err(e),
        None => Ok(run),
    }
}

/// Two runs at amplitudes `a` and `a/2` with identical seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct U0Report {
    pub amplitudes: [f64; 2],
    pub times: Vec<f64>,
    /// `||u0||_{H^1} / ||u+ + u-||_{H^1}` for each amplitude.
    pub ratio_a: Vec<f64>,
    pub ratio_half: Vec<f64>,
    /// `ratio_a / ratio_half`; quadratic smallness predicts 2.
    pub quotient: Vec<f64>,
    pub quotient_min: f64,
    pub quotient_max: f64,
}

pub fn u0_smallness_probe(config: &SimConfig, amplitude: f64) -> Result<U0Report> {
    let run = |a: f64| -> Result<DiagnosticsSeries> {
        let c = SimConfig { ic: InitialCondition { amplitude: a, ..config.ic }, ..config.clone() };
        Ok(finished(simulate(&c)?)?.series)
    };
    let (sa, sh) = (run(amplitude)?, run(amplitude / 2.0)?);
    let (ratio_a, ratio_half) = (sa.u0_ratios(), sh.u0_ratios());
    let quotient: Vec<f64> = ratio_a
        .iter()
        .zip(&ratio_half)
        .map(|(a, h)| {
            if *h > 0.0 {
                a / h
            } else if *a == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let quotient_min = quotient.iter().copied().fold(f64::INFINITY, f64::min);
    let quotient_max = quotient.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(U0Report {
        amplitudes: [amplitude, amplitude / 2.0],
        times: sa.times(),
        ratio_a,
        ratio_half,
        quotient,
        quotient_min,
        quotient_max,
    })
}

/// Empirical constant of `d/dt ||U||^2_{H^N} <= C ||U||^2_{H^N} ||U||_{W^{1,inf}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub times: Vec<f64>,
    /// Discrete `d/dt log ||U||^2_{H^N}` (central differences, one-sided at
    /// the ends).
    pub log_derivative: Vec<f64>,
    /// `|log_derivative| / W^{1,inf}` per sample.
    pub ratio: Vec<f64>,
    pub c_max: f64,
}

pub fn energy_growth_check(series: &DiagnosticsSeries) -> Result<EnergyReport> {
    let s = &series.samples;
    if s.len() < 3 {
        return Err(AbiError::Config("energy check needs at least three samples".into()));
    }
    let le: Vec<f64> = s.iter().map(|x| x.energy.ln()).collect();
    if le.iter().any(|x| !x.is_finite()) {
        return Err(AbiError::Config("energy must be positive at every sample".into()));
    }
    let n = s.len();
    let log_derivative: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = if i == 0 {
                (0, 1)
            } else if i == n - 1 {
                (n - 2, n - 1)
            } else {
                (i - 1, i + 1)
            };
            (le[b] - le[a]) / (s[b].t - s[a].t)
        })
        .collect();
    let ratio: Vec<f64> = log_derivative.iter().zip(s).map(|(d, x)| d.abs() / x.w1inf_u).collect();
    let c_max = ratio.iter().copied().fold(0.0, f64::max);
    Ok(EnergyReport { times: s.iter().map(|x| x.t).collect(), log_derivative, ratio, c_max })
}

/// Differences between runs at `dt`, `dt/2`, `dt/4` and the implied order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub dts: [f64; 3],
    /// `|u_dt - u_{dt/2}|` and `|u_{dt/2} - u_{dt/4}|` (sup norms at `t_end`).
    pub differences: [f64; 2],
    pub order: f64,
}

pub fn self_convergence(config: &SimConfig, dt: f64) -> Result<ConvergenceReport> {
    let finals: Result<Vec<StateField>> = [dt, dt / 2.0, dt / 4.0]
        .iter()
        .map(|&h| {
            let c = SimConfig { dt: Some(h), diag_dt: config.t_end, ..config.clone() };
            let run = finished(simulate(&c)?)?;
            if (run.plan.dt - h).abs() > 1e-12 * h {
                return Err(AbiError::Config(format!("dt {h} does not divide t_end")));
            }
            Ok(run.final_field)
        })
        .collect();
    let f = finals?;
    let differences = [f[0].max_abs_diff(&f[1]), f[1].max_abs_diff(&f[2])];
    Ok(ConvergenceReport {
        dts: [dt, dt / 2.0, dt / 4.0],
        differences,
        order: (differences[0] / differences[1]).log2(),
    })
}

fn default_probe_n() -> usize {
    128
}
fn default_probe_length() -> f64 {
    128.0
}
fn default_sigma() -> f64 {
    1.5
}
fn default_t_start() -> f64 {
    5.0
}
fn default_t_stop() -> f64 {
    50.0
}
fn default_count() -> usize {
    10
}

/// Free linear evolution of an `E(+)`-projected Gaussian bump in `tau`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionConfig {
    #[serde(default = "default_probe_n")]
    pub n: usize,
    #[serde(default = "default_probe_length")]
    pub length: f64,
    #[serde(default)]
    pub state: ConstantState,
    /// Gaussian width in physical units.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// Fit window, sampled geometrically.
    #[serde(default = "default_t_start")]
    pub t_start: f64,
    #[serde(default = "default_t_stop")]
    pub t_stop: f64,
    #[serde(default = "default_count")]
    pub count: usize,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        Self {
            n: default_probe_n(),
            length: default_probe_length(),
            state: ConstantState::default(),
            sigma: default_sigma(),
            t_start: default_t_start(),
            t_stop: default_t_stop(),
            count: default_count(),
        }
    }
}

impl DispersionConfig {
    pub fn times(&self) -> Vec<f64> {
        let r = (self.t_stop / self.t_start).ln();
        (0..self.count).map(|i| self.t_start * (r * i as f64 / (self.count - 1) as f64).exp()).collect()
    }

    /// `L / (2 max group speed)`: time for the front to reach the box edge
    /// from the centre.
    pub fn t_wrap(&self) -> Result<f64> {
        let m = self.state.metric()?;
        Ok(self.length / (2.0 * m.g.symmetric_eigenvalues().max().sqrt()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaySample {
    pub t: f64,
    pub sup: f64,
    pub l2: f64,
}

/// Least-squares exponent of the sup norm over the window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub norm: String,
    pub slope: f64,
    /// Approximate 95% interval from the regression standard error.
    pub ci: [f64; 2],
    pub window: [f64; 2],
    pub t_wrap: f64,
    pub initial_sup: f64,
    pub initial_l2: f64,
    pub samples: Vec<DecaySample>,
    /// Simulator time starts at 0; no shift to an initial time of 1.
    pub time_origin: f64,
}

/// Sup and L2 norms of the `E(+)` evolution of the bump at the given times.
pub fn evolve_plus_bump(cfg: &DispersionConfig, times: &[f64]) -> Result<Vec<DecaySample>> {
    cfg.state.validate()?;
    let grid = Grid::new(cfg.n, cfg.length)?;
    if !(cfg.sigma > 0.0) {
        return Err(AbiError::Config("sigma must be positive".into()));
    }
    let t_wrap = cfg.t_wrap()?;
    if let Some(t) = times.iter().find(|t| !(**t >= 0.0 && **t < t_wrap)) {
        return Err(AbiError::Config(format!("time {t} outside [0, t_wrap = {t_wrap:.3})")));
    }
    let m = grid.len();
    let c = cfg.length / 2.0;
    let mut g: Vec<Complex64> = (0..m)
        .into_par_iter()
        .map(|idx| {
            let x = grid.position(idx);
            let r2 = (x[0] - c).powi(2) + (x[1] - c).powi(2) + (x[2] - c).powi(2);
            Complex64::new((-r2 / (2.0 * cfg.sigma * cfg.sigma)).exp(), 0.0)
        })
        .collect();
    let fft = grid.fft();
    fft.forward(&mut g);
    // column tau of P+(k) times g^(k), and the frequency |k|_0
    let (cols, freq): (Vec<[f64; NCOMP]>, Vec<f64>) = (0..m)
        .into_par_iter()
        .map(|idx| {
            let k = grid.derivative_wavevector(idx);
            let kn = k.norm();
            if kn == 0.0 {
                return ([0.0; NCOMP], 0.0);
            }
            let (a, b, d) = alpha_beta_delta(&k, &cfg.state).expect("non-zero frequency");
            let p = projector_matrix(&(k / kn), a, b, d, Branch::Plus);
            (std::array::from_fn(|r| p[(r, TAU)]), norm0(&k, &cfg.state))
        })
        .unzip();
    let vol = grid.cell_volume();
    times
        .iter()
        .map(|&t| {
            let mut hat = SpectralField::zeros(grid);
            for comp in 0..NCOMP {
                let dst = hat.component_mut(comp);
                dst.par_iter_mut().enumerate().for_each(|(idx, z)| {
                    let ph = Complex64::from_polar(1.0, convention::PLUS_PHASE_SIGN * t * freq[idx]);
                    *z = ph * g[idx] * cols[idx][comp];
                });
            }
            let phys = hat.to_physical_complex();
            let (sup, sum2) = (0..m)
                .into_par_iter()
                .map(|idx| {
                    let s: f64 = (0..NCOMP).map(|comp| phys[comp * m + idx].norm_sqr()).sum();
                    (s.sqrt(), s)
                })
                .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1 + b.1));
            Ok(DecaySample { t, sup, l2: (sum2 * vol).sqrt() })
        })
        .collect()
}

/// Fit `log sup = slope log t + c` over the configured window.
pub fn dispersion_probe(cfg: &DispersionConfig) -> Result<DecayReport> {
    if !(cfg.t_start > 0.0 && cfg.t_stop > cfg.t_start) || cfg.count < 3 {
        return Err(AbiError::Config("fit window needs 0 < t_start < t_stop and at least 3 samples".into()));
    }
    let times = cfg.times();
    let samples = evolve_plus_bump(cfg, &times)?;
    let init = evolve_plus_bump(cfg, &[0.0])?[0].clone();
    let xs: Vec<f64> = samples.iter().map(|s| s.t.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.sup.ln()).collect();
    let (slope, se) = linear_fit(&xs, &ys);
    Ok(DecayReport {
        norm: "Linf".into(),
        slope,
        ci: [slope - 1.96 * se, slope + 1.96 * se],
        window: [cfg.t_start, cfg.t_stop],
        t_wrap: cfg.t_wrap()?,
        initial_sup: init.sup,
        initial_l2: init.l2,
        samples,
        time_origin: 0.0,
    })
}

/// Ordinary least squares slope and its standard error.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum();
    let se = if xs.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    (slope, se)
}
