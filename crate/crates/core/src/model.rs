//! Constant background states, the frequency metric `g0`, the Born-Infeld
//! lift and generation of admissible initial perturbations.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{AbiError, Result};
use crate::grid::{gradient, Grid, StateField, B, D, TAU, V};
use crate::{Mat3, Vec3, NCOMP};

/// Name of the pseudo-random generator recorded in run manifests.
pub const RNG_NAME: &str = "ChaCha8 (rand_chacha 0.9), counter-based stream keyed by the 64-bit seed";

/// Background `(tau0, v0, b0, d0)` of the ABI system.
///
/// Only `tau0`, `b0` and `d0` enter the linearised operators: the stored
/// `v0` is a Galilean frame velocity and is handled as an advection term by
/// the solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantState {
    pub tau0: f64,
    #[serde(default)]
    pub v0: [f64; 3],
    #[serde(default)]
    pub b0: [f64; 3],
    #[serde(default)]
    pub d0: [f64; 3],
}

impl Default for ConstantState {
    fn default() -> Self {
        Self::isotropic(1.0)
    }
}

impl ConstantState {
    pub fn new(tau0: f64, v0: [f64; 3], b0: [f64; 3], d0: [f64; 3]) -> Result<Self> {
        let s = Self { tau0, v0, b0, d0 };
        s.validate()?;
        Ok(s)
    }

    /// `tau0` with vanishing `v0`, `b0`, `d0`.
    pub fn isotropic(tau0: f64) -> Self {
        Self { tau0, v0: [0.0; 3], b0: [0.0; 3], d0: [0.0; 3] }
    }

    /// Background on the Born-Infeld manifold generated by constant fields
    /// `(B0, D0)`, in the frame where it is at rest (`v0 = 0`).
    pub fn from_bi(b_field: [f64; 3], d_field: [f64; 3]) -> Self {
        let w = lift_point(&Vec3::from(b_field), &Vec3::from(d_field));
        Self { tau0: w[TAU], v0: [0.0; 3], b0: [w[B[0]], w[B[1]], w[B[2]]], d0: [w[D[0]], w[D[1]], w[D[2]]] }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.tau0.is_finite() && self.v0.iter().chain(&self.b0).chain(&self.d0).all(|x| x.is_finite());
        if !finite {
            return Err(AbiError::Inadmissible("non-finite background".into()));
        }
        if self.tau0 <= 0.0 {
            return Err(AbiError::Inadmissible(format!("tau0 must be positive, got {}", self.tau0)));
        }
        Ok(())
    }

    pub fn b0(&self) -> Vec3 {
        Vec3::from(self.b0)
    }

    pub fn d0(&self) -> Vec3 {
        Vec3::from(self.d0)
    }

    pub fn v0(&self) -> Vec3 {
        Vec3::from(self.v0)
    }

    pub fn metric(&self) -> Result<Metric0> {
        metric_matrix(self)
    }

    /// Same background with the frame velocity removed.
    pub fn at_rest(&self) -> Self {
        Self { v0: [0.0; 3], ..*self }
    }

    /// Velocity `d0 ^ b0 / tau0` that puts the background on the (scaled)
    /// Born-Infeld manifold.
    pub fn manifold_velocity(&self) -> Vec3 {
        self.d0().cross(&self.b0()) / self.tau0
    }

    /// Scale `lambda` such that `(tau0, v*, b0, d0) / lambda` lies on the
    /// Born-Infeld manifold, with `v*` the manifold velocity.
    pub fn manifold_scale(&self) -> f64 {
        (self.tau0 * self.tau0
            + self.b0().norm_squared()
            + self.d0().norm_squared()
            + self.manifold_velocity().norm_squared())
        .sqrt()
    }

    /// Constant electromagnetic fields `(B0, D0) = (b0, d0) / tau0`.
    pub fn bi_fields(&self) -> (Vec3, Vec3) {
        (self.b0() / self.tau0, self.d0() / self.tau0)
    }

    /// Fastest linear wave speed, `sqrt(lambda_max(g0))`, plus `|v0|`.
    pub fn max_wave_speed(&self) -> Result<f64> {
        let m = self.metric()?;
        let lmax = m.g.symmetric_eigenvalues().max();
        Ok(lmax.sqrt() + self.v0().norm())
    }

    /// Background as a 10-vector in storage order.
    pub fn as_vector(&self) -> [f64; NCOMP] {
        [
            self.tau0, self.v0[0], self.v0[1], self.v0[2], self.b0[0], self.b0[1], self.b0[2], self.d0[0], self.d0[1],
            self.d0[2],
        ]
    }
}

/// The metric `g0 = tau0^2 I + b0 (x) b0 + d0 (x) d0` and its inverse.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metric0 {
    pub g: Mat3,
    pub g_inv: Mat3,
}

impl Metric0 {
    /// `|xi|_0 = sqrt(xi . g0 xi)`.
    pub fn norm(&self, xi: &Vec3) -> f64 {
        xi.dot(&(self.g * xi)).max(0.0).sqrt()
    }

    /// Dual norm `|x|_0' = sqrt(x . g0^{-1} x)`.
    pub fn dual_norm(&self, x: &Vec3) -> f64 {
        x.dot(&(self.g_inv * x)).max(0.0).sqrt()
    }

    pub fn apply(&self, xi: &Vec3) -> Vec3 {
        self.g * xi
    }

    pub fn inner(&self, xi: &Vec3, eta: &Vec3) -> f64 {
        xi.dot(&(self.g * eta))
    }
}

pub fn metric_matrix(state: &ConstantState) -> Result<Metric0> {
    state.validate()?;
    let (b, d) = (state.b0(), state.d0());
    let g = Mat3::identity() * state.tau0.powi(2) + b * b.transpose() + d * d.transpose();
    let chol = g.cholesky().ok_or_else(|| AbiError::Inadmissible("metric is not positive definite".into()))?;
    Ok(Metric0 { g, g_inv: chol.inverse() })
}

/// `|xi|_0 = sqrt(tau0^2 |xi|^2 + (b0.xi)^2 + (d0.xi)^2)`.
pub fn norm0(xi: &Vec3, state: &ConstantState) -> f64 {
    (state.tau0.powi(2) * xi.norm_squared() + state.b0().dot(xi).powi(2) + state.d0().dot(xi).powi(2)).sqrt()
}

/// `(alpha, beta, delta)` of a non-zero frequency.
pub fn alpha_beta_delta(xi: &Vec3, state: &ConstantState) -> Result<(f64, f64, f64)> {
    let n0 = norm0(xi, state);
    if n0 == 0.0 {
        return Err(AbiError::Domain("alpha, beta, delta undefined at xi = 0".into()));
    }
    Ok((state.tau0 * xi.norm() / n0, state.b0().dot(xi) / n0, state.d0().dot(xi) / n0))
}

/// Born-Infeld lift of one point: `tau = 1/h`, `v = tau D ^ B`, `b = tau B`,
/// `d = tau D`.
pub fn lift_point(b_field: &Vec3, d_field: &Vec3) -> [f64; NCOMP] {
    let cross = d_field.cross(b_field);
    let h = (1.0 + b_field.norm_squared() + d_field.norm_squared() + cross.norm_squared()).sqrt();
    let tau = 1.0 / h;
    let v = cross * tau;
    let b = b_field * tau;
    let d = d_field * tau;
    [tau, v[0], v[1], v[2], b[0], b[1], b[2], d[0], d[1], d[2]]
}

/// A pair of electromagnetic fields `(B, D)` on a periodic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct EMField {
    pub grid: Grid,
    pub b: [Vec<f64>; 3],
    pub d: [Vec<f64>; 3],
}

impl EMField {
    pub fn constant(grid: Grid, b: Vec3, d: Vec3) -> Self {
        let m = grid.len();
        Self { grid, b: std::array::from_fn(|i| vec![b[i]; m]), d: std::array::from_fn(|i| vec![d[i]; m]) }
    }

    /// Sup norms of the spectral divergences of `B` and `D`.
    pub fn max_divergence(&self) -> (f64, f64) {
        let div = |f: &[Vec<f64>; 3]| {
            let m = self.grid.len();
            let mut acc = vec![0.0; m];
            for (axis, comp) in f.iter().enumerate() {
                let g = gradient(&self.grid, comp);
                for (a, x) in acc.iter_mut().zip(&g[axis]) {
                    *a += x;
                }
            }
            acc.iter().map(|x| x.abs()).fold(0.0, f64::max)
        };
        (div(&self.b), div(&self.d))
    }
}

/// Map `(B, D)` to absolute ABI variables on the Born-Infeld manifold.
pub fn abi_from_bi(em: &EMField) -> StateField {
    let grid = em.grid;
    let mut out = StateField::zeros(grid);
    let m = grid.len();
    for idx in 0..m {
        let b = Vec3::new(em.b[0][idx], em.b[1][idx], em.b[2][idx]);
        let d = Vec3::new(em.d[0][idx], em.d[1][idx], em.d[2][idx]);
        let w = lift_point(&b, &d);
        for (c, x) in w.iter().enumerate() {
            out.data[c * m + idx] = *x;
        }
    }
    out
}

/// Which family of admissible data to draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    /// Random divergence-free `(B, D)` pushed through the Born-Infeld lift.
    #[default]
    BornInfeld,
    /// `b = d = 0`, random `tau` and irrotational `v = grad psi`.
    Chaplygin,
}

/// Band-limited random profile: Gaussian shell centred at lattice radius
/// `k0` with width `width` (both in integer wavenumber units), cut off at
/// `n/3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralProfile {
    pub k0: f64,
    pub width: f64,
    #[serde(default)]
    pub kind: InitialKind,
}

impl Default for SpectralProfile {
    fn default() -> Self {
        Self { k0: 2.0, width: 0.75, kind: InitialKind::BornInfeld }
    }
}

impl SpectralProfile {
    fn weight(&self, grid: &Grid, idx: usize) -> f64 {
        let m = grid.lattice(idx);
        let r = ((m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64).sqrt();
        if r == 0.0 || r >= grid.n as f64 / 3.0 {
            return 0.0;
        }
        (-((r - self.k0) / self.width).powi(2) / 2.0).exp()
    }
}

fn random_spectrum(grid: &Grid, profile: &SpectralProfile, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..grid.len())
        .map(|idx| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im) * profile.weight(grid, idx)
        })
        .collect()
}

fn real_part_inverse(grid: &Grid, mut hat: Vec<Complex64>) -> Vec<f64> {
    grid.fft().inverse(&mut hat);
    hat.into_iter().map(|z| z.re).collect()
}

/// Random real divergence-free vector field with the given profile.
fn random_solenoidal(grid: &Grid, profile: &SpectralProfile, rng: &mut ChaCha8Rng) -> [Vec<f64>; 3] {
    let mut hats: [Vec<Complex64>; 3] = std::array::from_fn(|_| random_spectrum(grid, profile, rng));
    for idx in 0..grid.len() {
        let k = grid.wavevector(idx);
        let k2 = k.norm_squared();
        if k2 == 0.0 {
            continue;
        }
        let proj: Complex64 = (0..3).map(|a| hats[a][idx] * k[a]).sum::<Complex64>() / k2;
        for (a, h) in hats.iter_mut().enumerate() {
            h[idx] -= proj * k[a];
        }
    }
    hats.map(|h| real_part_inverse(grid, h))
}

fn sup_vector(f: &[Vec<f64>; 3]) -> f64 {
    (0..f[0].len()).map(|i| (f[0][i].powi(2) + f[1][i].powi(2) + f[2][i].powi(2)).sqrt()).fold(0.0, f64::max)
}

fn rescale(f: &mut [Vec<f64>], target: f64, current: f64) {
    let s = if current > 0.0 { target / current } else { 0.0 };
    for comp in f.iter_mut() {
        comp.iter_mut().for_each(|x| *x *= s);
    }
}

/// Draw an admissible perturbation `u` of `state`.
///
/// `amplitude` is the sup norm of the random fields before the lift
/// (`|dB|`, `|dD|` for Born-Infeld data, `|tau|` and `|v|` for Chaplygin
/// data). The result satisfies the constraint equations to spectral accuracy
/// and `tau0 + tau > 0`.
pub fn admissible_perturbation(
    seed: u64,
    amplitude: f64,
    profile: &SpectralProfile,
    state: &ConstantState,
    grid: &Grid,
) -> Result<StateField> {
    state.validate()?;
    if !(amplitude >= 0.0) || !amplitude.is_finite() {
        return Err(AbiError::Config(format!("amplitude must be finite and non-negative, got {amplitude}")));
    }
    if !(profile.width > 0.0) {
        return Err(AbiError::Config("profile width must be positive".into()));
    }
    let mut u = StateField::zeros(*grid);
    if amplitude == 0.0 {
        return Ok(u);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = grid.len();
    match profile.kind {
        InitialKind::BornInfeld => {
            let mut db = random_solenoidal(grid, profile, &mut rng);
            let mut dd = random_solenoidal(grid, profile, &mut rng);
            let (sb, sd) = (sup_vector(&db), sup_vector(&dd));
            rescale(&mut db, amplitude, sb);
            rescale(&mut dd, amplitude, sd);
            let (b0, d0) = state.bi_fields();
            let lambda = state.manifold_scale();
            let base = lift_point(&b0, &d0);
            for idx in 0..m {
                let b = b0 + Vec3::new(db[0][idx], db[1][idx], db[2][idx]);
                let d = d0 + Vec3::new(dd[0][idx], dd[1][idx], dd[2][idx]);
                let w = lift_point(&b, &d);
                for c in 0..NCOMP {
                    u.data[c * m + idx] = lambda * (w[c] - base[c]);
                }
            }
        }
        InitialKind::Chaplygin => {
            if state.b0().norm() > 0.0 || state.d0().norm() > 0.0 {
                return Err(AbiError::Config("Chaplygin data require b0 = d0 = 0".into()));
            }
            let mut tau = vec![real_part_inverse(grid, random_spectrum(grid, profile, &mut rng))];
            let psi = real_part_inverse(grid, random_spectrum(grid, profile, &mut rng));
            let mut v = gradient(grid, &psi);
            let st = tau[0].iter().map(|x| x.abs()).fold(0.0, f64::max);
            let sv = sup_vector(&v);
            rescale(&mut tau, amplitude, st);
            rescale(&mut v, amplitude, sv);
            u.component_mut(TAU).copy_from_slice(&tau[0]);
            for a in 0..3 {
                u.component_mut(V[a]).copy_from_slice(&v[a]);
            }
        }
    }
    let min_tau = u.component(TAU).iter().fold(f64::INFINITY, |a, &x| a.min(x)) + state.tau0;
    if min_tau <= 0.0 {
        return Err(AbiError::Inadmissible(format!("amplitude {amplitude} drives tau0 + tau to {min_tau}")));
    }
    Ok(u)
}

/// Whether a field holds absolute variables or a perturbation about a
/// background.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    Absolute,
    Perturbation,
}

/// `(tau, v - v0, b, d)(x + v0 t)` for a whole-cell shift `v0 t`.
///
/// For perturbation fields the velocity offset belongs to the background, so
/// only the translation is applied.
pub fn galilean_shift(field: &StateField, v0: [f64; 3], t: f64, frame: Frame) -> Result<StateField> {
    let grid = field.grid;
    let n = grid.n as i64;
    let mut cells = [0i64; 3];
    for a in 0..3 {
        let s = v0[a] * t / grid.dx();
        let r = s.round();
        if (s - r).abs() > 1e-9 * s.abs().max(1.0) {
            return Err(AbiError::Config(format!("shift along axis {a} is {s} cells, not a whole number")));
        }
        cells[a] = (r as i64).rem_euclid(n);
    }
    let nu = grid.n;
    let m = grid.len();
    let mut out = StateField::zeros(grid);
    for idx in 0..m {
        let (i, j, l) = grid.split(idx);
        let src = (((i as i64 + cells[0]) % n) as usize * nu + ((j as i64 + cells[1]) % n) as usize) * nu
            + ((l as i64 + cells[2]) % n) as usize;
        for c in 0..NCOMP {
            out.data[c * m + idx] = field.data[c * m + src];
        }
    }
    if frame == Frame::Absolute {
        for a in 0..3 {
            out.component_mut(V[a]).iter_mut().for_each(|x| *x -= v0[a]);
        }
    }
    Ok(out)
}
