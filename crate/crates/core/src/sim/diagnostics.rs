//! Residuals, norms and the per-sample diagnostic record.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{gradient_from_spectrum, Grid, SpectralField, StateField, B, D, TAU, V};
use crate::model::ConstantState;
use crate::quasilinear::{constraints, Gradient};
use crate::spectral::decompose_spectral;
use crate::NCOMP;

/// Sup and L2 norms of the three constraint residual fields.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintResidual {
    pub div_b_sup: f64,
    pub div_d_sup: f64,
    pub rot_sup: f64,
    pub div_b_l2: f64,
    pub div_d_l2: f64,
    pub rot_l2: f64,
}

fn spectral_gradients(u: &StateField) -> Vec<[Vec<f64>; 3]> {
    let fft = u.grid.fft();
    (0..NCOMP)
        .into_par_iter()
        .map(|c| {
            let mut hat: Vec<Complex64> = u.component(c).iter().map(|&x| Complex64::new(x, 0.0)).collect();
            fft.forward(&mut hat);
            gradient_from_spectrum(&u.grid, &hat)
        })
        .collect()
}

/// Constraint expressions `tau div b - b.grad tau`, `tau div d - d.grad tau`
/// and `tau curl v - b.grad d + d.grad b` at the absolute state
/// `c + u`, for a perturbation `u` of `state`.
pub fn constraint_residual(u: &StateField, state: &ConstantState) -> ConstraintResidual {
    let grid = u.grid;
    let m = grid.len();
    let bg = state.as_vector();
    let grads = spectral_gradients(u);
    let rows: Vec<[f64; 5]> = (0..m)
        .into_par_iter()
        .map(|idx| {
            let w: [f64; NCOMP] = std::array::from_fn(|c| bg[c] + u.data[c * m + idx]);
            let g: Gradient = std::array::from_fn(|c| [grads[c][0][idx], grads[c][1][idx], grads[c][2][idx]]);
            constraints(&w, &g)
        })
        .collect();
    let vol = grid.cell_volume();
    let (mut s, mut l2) = ([0.0f64; 3], [0.0f64; 3]);
    for r in &rows {
        let vals = [r[0].abs(), r[1].abs(), (r[2] * r[2] + r[3] * r[3] + r[4] * r[4]).sqrt()];
        for q in 0..3 {
            s[q] = s[q].max(vals[q]);
            l2[q] += vals[q] * vals[q] * vol;
        }
    }
    ConstraintResidual {
        div_b_sup: s[0],
        div_d_sup: s[1],
        rot_sup: s[2],
        div_b_l2: l2[0].sqrt(),
        div_d_l2: l2[1].sqrt(),
        rot_l2: l2[2].sqrt(),
    }
}

/// Sup norms of `tau^2 + v^2 + b^2 + d^2 - 1` and `tau v - d ^ b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifoldResidual {
    pub scalar_sup: f64,
    pub vector_sup: f64,
}

fn manifold_point(w: &[f64; NCOMP]) -> (f64, f64) {
    let norm2: f64 = w.iter().map(|x| x * x).sum();
    let (tau, v, b, d) = (w[TAU], V.map(|i| w[i]), B.map(|i| w[i]), D.map(|i| w[i]));
    let cross = [d[1] * b[2] - d[2] * b[1], d[2] * b[0] - d[0] * b[2], d[0] * b[1] - d[1] * b[0]];
    let vec: f64 = (0..3).map(|i| (tau * v[i] - cross[i]).powi(2)).sum::<f64>().sqrt();
    ((norm2 - 1.0).abs(), vec)
}

/// Residuals of an absolute-variable field.
pub fn manifold_residual(field_abs: &StateField) -> ManifoldResidual {
    let m = field_abs.grid.len();
    let (s, v) = (0..m)
        .into_par_iter()
        .map(|idx| manifold_point(&field_abs.point(idx)))
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    ManifoldResidual { scalar_sup: s, vector_sup: v }
}

/// Residuals of `c + u` after moving to the frame where the background is on
/// the manifold (`v0 -> v*`) and dividing by the manifold scale.
pub fn manifold_residual_of_perturbation(u: &StateField, state: &ConstantState) -> ManifoldResidual {
    let m = u.grid.len();
    let lambda = state.manifold_scale();
    let mut bg = state.as_vector();
    let vstar = state.manifold_velocity();
    for a in 0..3 {
        bg[V[a]] = vstar[a];
    }
    let (s, v) = (0..m)
        .into_par_iter()
        .map(|idx| {
            let w: [f64; NCOMP] = std::array::from_fn(|c| (bg[c] + u.data[c * m + idx]) / lambda);
            manifold_point(&w)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    ManifoldResidual { scalar_sup: s, vector_sup: v }
}

fn pointwise_sup(grid: &Grid, comps: &[Vec<f64>]) -> f64 {
    (0..grid.len())
        .into_par_iter()
        .map(|i| comps.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
        .reduce(|| 0.0, f64::max)
}

/// Homogeneous Besov norms `(B^0_{inf,1}, B^1_{inf,1})`: sums over dyadic
/// shells `2^j <= |k| < 2^{j+1}` of `2^{js}` times the sup norm of the
/// shell-filtered field (pointwise Euclidean norm over components).
pub fn besov_norms(field: &StateField) -> (f64, f64) {
    besov_norms_spectral(&field.to_spectral())
}

pub fn besov_norms_spectral(hat: &SpectralField) -> (f64, f64) {
    let grid = hat.grid;
    let m = grid.len();
    let shell: Vec<Option<i32>> = (0..m)
        .map(|i| {
            let k = grid.wavevector(i).norm();
            (k > 0.0).then(|| k.log2().floor() as i32)
        })
        .collect();
    let mut js: Vec<i32> = shell.iter().flatten().copied().collect();
    js.sort_unstable();
    js.dedup();
    let fft = grid.fft();
    let (mut b0, mut b1) = (0.0, 0.0);
    for j in js {
        let comps: Vec<Vec<f64>> = (0..NCOMP)
            .into_par_iter()
            .map(|c| {
                let mut d: Vec<Complex64> = hat
                    .component(c)
                    .iter()
                    .zip(&shell)
                    .map(|(z, s)| if *s == Some(j) { *z } else { Complex64::default() })
                    .collect();
                fft.inverse(&mut d);
                d.into_iter().map(|z| z.re).collect()
            })
            .collect();
        let sup = pointwise_sup(&grid, &comps);
        b0 += sup;
        b1 += (j as f64).exp2() * sup;
    }
    (b0, b1)
}

/// `sup |u| + sup |grad u|` with pointwise Euclidean norms.
pub fn w1inf(u: &StateField) -> f64 {
    let grads = spectral_gradients(u);
    let flat: Vec<Vec<f64>> = grads.into_iter().flat_map(|g| g.into_iter()).collect();
    let vals: Vec<Vec<f64>> = (0..NCOMP).map(|c| u.component(c).to_vec()).collect();
    pointwise_sup(&u.grid, &vals) + pointwise_sup(&u.grid, &flat)
}

/// Column names of `series.csv`, in order.
pub const SERIES_COLUMNS: [&str; 16] = [
    "t",
    "H1_U",
    "H6_U",
    "HN_U",
    "H1_up",
    "H1_um",
    "H1_u0",
    "W1inf_U",
    "B0inf1",
    "B1inf1",
    "res_divb_sup",
    "res_divd_sup",
    "res_rot_sup",
    "man_scalar_sup",
    "man_vector_sup",
    "energy",
];

/// One diagnostic record. `energy` is `HN_U^2`, the quantity of the energy
/// law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSample {
    pub t: f64,
    pub h1_u: f64,
    pub h6_u: f64,
    pub hn_u: f64,
    pub h1_up: f64,
    pub h1_um: f64,
    pub h1_u0: f64,
    pub w1inf_u: f64,
    pub b0inf1: f64,
    pub b1inf1: f64,
    pub res_divb_sup: f64,
    pub res_divd_sup: f64,
    pub res_rot_sup: f64,
    pub man_scalar_sup: f64,
    pub man_vector_sup: f64,
    pub energy: f64,
}

impl DiagnosticsSample {
    pub fn values(&self) -> [f64; 16] {
        [
            self.t,
            self.h1_u,
            self.h6_u,
            self.hn_u,
            self.h1_up,
            self.h1_um,
            self.h1_u0,
            self.w1inf_u,
            self.b0inf1,
            self.b1inf1,
            self.res_divb_sup,
            self.res_divd_sup,
            self.res_rot_sup,
            self.man_scalar_sup,
            self.man_vector_sup,
            self.energy,
        ]
    }

    /// `||u0||_{H^1} / ||u+ + u-||_{H^1}`.
    pub fn u0_ratio(&self, wave_h1: f64) -> f64 {
        if wave_h1 > 0.0 {
            self.h1_u0 / wave_h1
        } else {
            0.0
        }
    }
}

/// Diagnostics of a perturbation `u` at time `t`. Also returns
/// `||u+ + u-||_{H^1}`.
pub fn sample(t: f64, u: &StateField, state: &ConstantState, sobolev_n: f64) -> Result<(DiagnosticsSample, f64)> {
    let hat = u.to_spectral();
    let parts = decompose_spectral(&hat, state)?;
    let wave = parts.plus.add(&parts.minus);
    let (b0, b1) = besov_norms_spectral(&hat);
    let cr = constraint_residual(u, state);
    let mr = manifold_residual_of_perturbation(u, state);
    let hn = hat.sobolev_norm(sobolev_n);
    let s = DiagnosticsSample {
        t,
        h1_u: hat.sobolev_norm(1.0),
        h6_u: hat.sobolev_norm(6.0),
        hn_u: hn,
        h1_up: parts.plus.sobolev_norm(1.0),
        h1_um: parts.minus.sobolev_norm(1.0),
        h1_u0: parts.zero.sobolev_norm(1.0),
        w1inf_u: w1inf(u),
        b0inf1: b0,
        b1inf1: b1,
        res_divb_sup: cr.div_b_sup,
        res_divd_sup: cr.div_d_sup,
        res_rot_sup: cr.rot_sup,
        man_scalar_sup: mr.scalar_sup,
        man_vector_sup: mr.vector_sup,
        energy: hn * hn,
    };
    Ok((s, wave.sobolev_norm(1.0)))
}

/// Time series of diagnostics; `terminated` is set when a run stopped early.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSeries {
    pub samples: Vec<DiagnosticsSample>,
    /// `||u+ + u-||_{H^1}` at each sample.
    pub wave_h1: Vec<f64>,
    pub terminated: Option<String>,
}

impl DiagnosticsSeries {
    pub fn push(&mut self, s: DiagnosticsSample, wave_h1: f64) {
        debug_assert!(self.samples.last().is_none_or(|p| p.t < s.t));
        self.samples.push(s);
        self.wave_h1.push(wave_h1);
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    /// `||u0||_{H^1} / ||u+ + u-||_{H^1}` at each sample.
    pub fn u0_ratios(&self) -> Vec<f64> {
        self.samples.iter().zip(&self.wave_h1).map(|(s, w)| s.u0_ratio(*w)).collect()
    }

    pub fn all_finite(&self) -> bool {
        self.samples.iter().all(|s| s.values().iter().all(|x| x.is_finite()))
    }

    pub fn to_csv(&self) -> String {
        let mut out = SERIES_COLUMNS.join(",");
        out.push('\n');
        for s in &self.samples {
            let row: Vec<String> = s.values().iter().map(|x| format!("{x:.17e}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}
