//! Periodic cubic grids and the 10-component fields that live on them.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AbiError, Result};
use crate::fft::Fft3;
use crate::{Vec3, NCOMP};

/// Component names in storage order.
pub const COMPONENT_LAYOUT: &str = "tau,v,b,d";

pub const TAU: usize = 0;
pub const V: [usize; 3] = [1, 2, 3];
pub const B: [usize; 3] = [4, 5, 6];
pub const D: [usize; 3] = [7, 8, 9];

/// Cubic periodic box `[0, L)^3` sampled with `n` points per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n: usize,
    pub length: f64,
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(AbiError::Grid(format!("points per axis must be a power of two >= 2, got {n}")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(AbiError::Grid(format!("box length must be positive, got {length}")));
        }
        Ok(Self { n, length })
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(3)
    }

    /// Signed integer wavenumber for FFT bin `i` (range `[-n/2, n/2)`).
    pub fn index_wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    pub fn split(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx / (n * n), (idx / n) % n, idx % n)
    }

    /// Integer lattice vector of a flat spectral index.
    pub fn lattice(&self, idx: usize) -> [i64; 3] {
        let (i, j, l) = self.split(idx);
        [self.index_wavenumber(i), self.index_wavenumber(j), self.index_wavenumber(l)]
    }

    /// Physical wave vector `2 pi n / L` of a flat spectral index.
    pub fn wavevector(&self, idx: usize) -> Vec3 {
        let m = self.lattice(idx);
        let f = 2.0 * PI / self.length;
        Vec3::new(m[0] as f64 * f, m[1] as f64 * f, m[2] as f64 * f)
    }

    /// Wave vector used for differentiation: the Nyquist bin is zeroed so that
    /// derivatives of real fields stay real.
    pub fn derivative_wavevector(&self, idx: usize) -> Vec3 {
        let m = self.lattice(idx);
        let nyq = -(self.n as i64) / 2;
        let f = 2.0 * PI / self.length;
        let c = |q: i64| if q == nyq { 0.0 } else { q as f64 * f };
        Vec3::new(c(m[0]), c(m[1]), c(m[2]))
    }

    /// Orszag two-thirds rule: keep modes with every `|n_j| <= n/3`.
    pub fn dealias_keep(&self, idx: usize) -> bool {
        let cut = (self.n / 3) as i64;
        self.lattice(idx).iter().all(|q| q.abs() <= cut)
    }

    /// Position of grid point `idx`.
    pub fn position(&self, idx: usize) -> Vec3 {
        let (i, j, l) = self.split(idx);
        let h = self.dx();
        Vec3::new(i as f64 * h, j as f64 * h, l as f64 * h)
    }

    pub fn fft(&self) -> Arc<Fft3> {
        fft_cache(self.n)
    }
}

fn fft_cache(n: usize) -> Arc<Fft3> {
    use std::collections::HashMap;
    use std::sync::Mutex;
    static CACHE: Mutex<Option<HashMap<usize, Arc<Fft3>>>> = Mutex::new(None);
    let mut guard = CACHE.lock().expect("fft cache poisoned");
    guard.get_or_insert_with(HashMap::new).entry(n).or_insert_with(|| Arc::new(Fft3::new(n))).clone()
}

/// Real 10-component field in physical space, component-major.
#[derive(Clone, Debug, PartialEq)]
pub struct StateField {
    pub grid: Grid,
    pub data: Vec<f64>,
}

impl StateField {
    pub fn zeros(grid: Grid) -> Self {
        Self { grid, data: vec![0.0; NCOMP * grid.len()] }
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let m = self.grid.len();
        &self.data[c * m..(c + 1) * m]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let m = self.grid.len();
        &mut self.data[c * m..(c + 1) * m]
    }

    /// The 10-vector at grid point `idx`.
    pub fn point(&self, idx: usize) -> [f64; NCOMP] {
        let m = self.grid.len();
        std::array::from_fn(|c| self.data[c * m + idx])
    }

    pub fn to_spectral(&self) -> SpectralField {
        let m = self.grid.len();
        let fft = self.grid.fft();
        let mut data: Vec<Complex64> = self.data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        for chunk in data.chunks_mut(m) {
            fft.forward(chunk);
        }
        SpectralField { grid: self.grid, data }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Largest pointwise Euclidean norm of the 10-vector.
    pub fn sup_norm(&self) -> f64 {
        let m = self.grid.len();
        (0..m).map(|i| (0..NCOMP).map(|c| self.data[c * m + i].powi(2)).sum::<f64>().sqrt()).fold(0.0, f64::max)
    }

    /// Discrete `L^2` norm, `(dV sum |u|^2)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.cell_volume() * self.data.iter().map(|x| x * x).sum::<f64>()).sqrt()
    }

    pub fn axpy(&mut self, a: f64, other: &StateField) {
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += a * y;
        }
    }

    /// Maximum absolute componentwise difference.
    pub fn max_abs_diff(&self, other: &StateField) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.abs()).fold(0.0, f64::max)
    }
}

/// 10-component field of Fourier coefficients (unnormalised forward FFT).
///
/// Real fields have Hermitian-symmetric coefficients; the branch fields
/// `u^+` and `u^-` produced by [`crate::spectral::decompose`] are complex
/// conjugates of each other and are only meaningful in this representation.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    pub grid: Grid,
    pub data: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        Self { grid, data: vec![Complex64::default(); NCOMP * grid.len()] }
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let m = self.grid.len();
        &self.data[c * m..(c + 1) * m]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let m = self.grid.len();
        &mut self.data[c * m..(c + 1) * m]
    }

    pub fn mode(&self, idx: usize) -> [Complex64; NCOMP] {
        let m = self.grid.len();
        std::array::from_fn(|c| self.data[c * m + idx])
    }

    pub fn set_mode(&mut self, idx: usize, value: &[Complex64; NCOMP]) {
        let m = self.grid.len();
        for (c, z) in value.iter().enumerate() {
            self.data[c * m + idx] = *z;
        }
    }

    /// Apply `f(idx, mode)` to every Fourier mode in parallel.
    pub fn map_modes<F>(&self, f: F) -> SpectralField
    where
        F: Fn(usize, &[Complex64; NCOMP]) -> [Complex64; NCOMP] + Sync,
    {
        let m = self.grid.len();
        let modes: Vec<[Complex64; NCOMP]> = (0..m).into_par_iter().map(|idx| f(idx, &self.mode(idx))).collect();
        let mut out = SpectralField::zeros(self.grid);
        for (idx, value) in modes.iter().enumerate() {
            out.set_mode(idx, value);
        }
        out
    }

    /// Inverse transform of every component (complex-valued output).
    pub fn to_physical_complex(&self) -> Vec<Complex64> {
        let m = self.grid.len();
        let fft = self.grid.fft();
        let mut data = self.data.clone();
        for chunk in data.chunks_mut(m) {
            fft.inverse(chunk);
        }
        data
    }

    /// Inverse transform keeping the real part; exact for Hermitian spectra.
    pub fn to_physical(&self) -> StateField {
        let data = self.to_physical_complex().into_iter().map(|z| z.re).collect();
        StateField { grid: self.grid, data }
    }

    /// Discrete `H^s` norm, `(L^3 / n^6) sum_k (1 + |k|^2)^s |u_k|^2`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let m = self.grid.len();
        let vol = self.grid.length.powi(3);
        let weights: Vec<f64> = (0..m).map(|idx| (1.0 + self.grid.wavevector(idx).norm_squared()).powf(s)).collect();
        let mut acc = 0.0;
        for c in 0..NCOMP {
            let comp = self.component(c);
            for (z, w) in comp.iter().zip(&weights) {
                acc += w * z.norm_sqr();
            }
        }
        (vol * acc / (m as f64 * m as f64)).sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.sobolev_norm(0.0)
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        SpectralField { grid: self.grid, data }
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        SpectralField { grid: self.grid, data }
    }

    pub fn max_abs_diff(&self, other: &SpectralField) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Spectral gradient of a scalar physical field, one real field per axis.
pub fn gradient(grid: &Grid, field: &[f64]) -> [Vec<f64>; 3] {
    let fft = grid.fft();
    let mut hat: Vec<Complex64> = field.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft.forward(&mut hat);
    gradient_from_spectrum(grid, &hat)
}

pub(crate) fn gradient_from_spectrum(grid: &Grid, hat: &[Complex64]) -> [Vec<f64>; 3] {
    let fft = grid.fft();
    std::array::from_fn(|axis| {
        let mut d: Vec<Complex64> = hat
            .iter()
            .enumerate()
            .map(|(idx, z)| Complex64::new(0.0, grid.derivative_wavevector(idx)[axis]) * z)
            .collect();
        fft.inverse(&mut d);
        d.into_iter().map(|z| z.re).collect()
    })
}
