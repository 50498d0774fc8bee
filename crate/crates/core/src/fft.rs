//! Cubic 3-D complex FFT built from rustfft line transforms.
//!
//! Layout is row-major `(i, j, l)` with `l` fastest, so flat index
//! `(i * n + j) * n + l`. The forward transform is unnormalised
//! (`sum_x u(x) e^{-i k x}`), the inverse carries the `1/n^3` factor.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

pub struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("n", &self.n).finish()
    }
}

impl Fft3 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { n, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
        let scale = 1.0 / (self.n * self.n * self.n) as f64;
        data.par_iter_mut().for_each(|z| *z *= scale);
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n, "buffer does not match grid");
        // axis 2: contiguous lines
        data.par_chunks_mut(n).for_each(|line| plan.process(line));
        // axis 1: strided by n inside each i-plane
        data.par_chunks_mut(n * n).for_each(|plane| {
            let mut line = vec![Complex64::default(); n];
            for l in 0..n {
                for j in 0..n {
                    line[j] = plane[j * n + l];
                }
                plan.process(&mut line);
                for j in 0..n {
                    plane[j * n + l] = line[j];
                }
            }
        });
        // axis 0: gather columns into a transposed scratch buffer
        let mut scratch = vec![Complex64::default(); n * n * n];
        scratch.par_chunks_mut(n).enumerate().for_each(|(jl, line)| {
            for (i, z) in line.iter_mut().enumerate() {
                *z = data[i * n * n + jl];
            }
            plan.process(line);
        });
        data.par_chunks_mut(n * n).enumerate().for_each(|(i, plane)| {
            for (jl, z) in plane.iter_mut().enumerate() {
                *z = scratch[jl * n + i];
            }
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn single_mode_lands_on_its_bin() {
        let n = 8;
        let fft = Fft3::new(n);
        let (ki, kj, kl) = (1usize, 3usize, 6usize);
        let mut data: Vec<Complex64> = (0..n * n * n)
            .map(|idx| {
                let (i, j, l) = (idx / (n * n), (idx / n) % n, idx % n);
                let phase = 2.0 * PI * ((ki * i + kj * j + kl * l) as f64) / n as f64;
                Complex64::from_polar(1.0, phase)
            })
            .collect();
        fft.forward(&mut data);
        for (idx, z) in data.iter().enumerate() {
            let expect = if idx == (ki * n + kj) * n + kl { (n * n * n) as f64 } else { 0.0 };
            assert!((z - Complex64::new(expect, 0.0)).norm() < 1e-9, "bin {idx}: {z}");
        }
    }

    #[test]
    fn roundtrip_is_identity() {
        let n = 16;
        let fft = Fft3::new(n);
        let orig: Vec<Complex64> =
            (0..n * n * n).map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        let mut data = orig.clone();
        fft.forward(&mut data);
        fft.inverse(&mut data);
        let err = orig.iter().zip(&data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }
}
