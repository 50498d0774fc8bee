//! Pseudo-spectral right-hand side and classical RK4 stepping.
//!
//! The state is the perturbation `u` about the background `c`. The full
//! nonlinear right-hand side is the quasilinear flux at the absolute state,
//! `flux(c + u, grad u)`, with derivatives taken spectrally and products
//! formed pointwise. With dealiasing on, `u` is truncated to the two-thirds
//! box before the products and the result is truncated again, so every
//! right-hand side is real and band-limited.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{AbiError, Result};
use crate::grid::{Grid, StateField};
use crate::model::ConstantState;
use crate::quasilinear::{flux, Gradient};
use crate::{Vec3, NCOMP};

#[derive(Clone, Debug)]
pub struct Solver {
    pub grid: Grid,
    pub state: ConstantState,
    pub dealias: bool,
    background: [f64; NCOMP],
    kd: Vec<Vec3>,
    keep: Vec<bool>,
}

impl Solver {
    pub fn new(grid: Grid, state: ConstantState, dealias: bool) -> Result<Self> {
        state.validate()?;
        let m = grid.len();
        Ok(Self {
            grid,
            state,
            dealias,
            background: state.as_vector(),
            kd: (0..m).map(|i| grid.derivative_wavevector(i)).collect(),
            keep: (0..m).map(|i| !dealias || grid.dealias_keep(i)).collect(),
        })
    }

    fn truncate(&self, hat: &mut [Complex64]) {
        if self.dealias {
            hat.par_iter_mut().zip(&self.keep).for_each(|(z, k)| {
                if !k {
                    *z = Complex64::default();
                }
            });
        }
    }

    /// Projection onto the modes the scheme evolves: the two-thirds box with
    /// dealiasing on, the identity otherwise. Modes outside the box would
    /// otherwise stay frozen in the state and never see the dynamics.
    pub fn project(&self, u: &StateField) -> StateField {
        if !self.dealias {
            return u.clone();
        }
        let m = self.grid.len();
        let fft = self.grid.fft();
        let mut out = u.clone();
        out.data.par_chunks_mut(m).for_each(|chunk| {
            let mut hat: Vec<Complex64> = chunk.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            fft.forward(&mut hat);
            self.truncate(&mut hat);
            fft.inverse(&mut hat);
            chunk.iter_mut().zip(hat).for_each(|(x, z)| *x = z.re);
        });
        out
    }

    /// `du/dt`; `None` if any product is not finite.
    pub fn rhs(&self, u: &StateField) -> Option<StateField> {
        let grid = self.grid;
        let m = grid.len();
        let fft = grid.fft();
        // per component: filtered values and three derivatives
        let parts: Vec<[Vec<f64>; 4]> = (0..NCOMP)
            .into_par_iter()
            .map(|c| {
                let mut hat: Vec<Complex64> = u.component(c).iter().map(|&x| Complex64::new(x, 0.0)).collect();
                fft.forward(&mut hat);
                self.truncate(&mut hat);
                let inv = |f: &dyn Fn(usize, Complex64) -> Complex64| {
                    let mut d: Vec<Complex64> = hat.iter().enumerate().map(|(i, z)| f(i, *z)).collect();
                    fft.inverse(&mut d);
                    d.into_iter().map(|z| z.re).collect::<Vec<f64>>()
                };
                [
                    inv(&|_, z| z),
                    inv(&|i, z| Complex64::new(0.0, self.kd[i][0]) * z),
                    inv(&|i, z| Complex64::new(0.0, self.kd[i][1]) * z),
                    inv(&|i, z| Complex64::new(0.0, self.kd[i][2]) * z),
                ]
            })
            .collect();
        let mut out = vec![0.0; NCOMP * m];
        let values: Vec<[f64; NCOMP]> = (0..m)
            .into_par_iter()
            .map(|idx| {
                let w: [f64; NCOMP] = std::array::from_fn(|c| self.background[c] + parts[c][0][idx]);
                let g: Gradient = std::array::from_fn(|c| [parts[c][1][idx], parts[c][2][idx], parts[c][3][idx]]);
                flux(&w, &g)
            })
            .collect();
        for (idx, v) in values.iter().enumerate() {
            for c in 0..NCOMP {
                out[c * m + idx] = v[c];
            }
        }
        if !out.iter().all(|x| x.is_finite()) {
            return None;
        }
        Some(self.project(&StateField { grid, data: out }))
    }

    /// One classical RK4 step from time `t`.
    pub fn step_rk4(&self, u: &StateField, dt: f64, t: f64) -> Result<StateField> {
        let blow = |what: &str| AbiError::BlowUp { t, what: what.into() };
        let stage = |base: &StateField, k: &StateField, h: f64| {
            let mut s = base.clone();
            s.axpy(h, k);
            s
        };
        let k1 = self.rhs(u).ok_or_else(|| blow("non-finite right-hand side"))?;
        let k2 = self.rhs(&stage(u, &k1, dt / 2.0)).ok_or_else(|| blow("non-finite right-hand side"))?;
        let k3 = self.rhs(&stage(u, &k2, dt / 2.0)).ok_or_else(|| blow("non-finite right-hand side"))?;
        let k4 = self.rhs(&stage(u, &k3, dt)).ok_or_else(|| blow("non-finite right-hand side"))?;
        let mut next = u.clone();
        next.axpy(dt / 6.0, &k1);
        next.axpy(dt / 3.0, &k2);
        next.axpy(dt / 3.0, &k3);
        next.axpy(dt / 6.0, &k4);
        if !next.is_finite() {
            return Err(AbiError::BlowUp { t: t + dt, what: "non-finite state".into() });
        }
        let tau_min = next.component(crate::grid::TAU).iter().fold(f64::INFINITY, |a, &x| a.min(x)) + self.state.tau0;
        if tau_min <= 0.0 {
            return Err(AbiError::BlowUp { t: t + dt, what: format!("tau reached {tau_min}") });
        }
        Ok(next)
    }
}

/// Right-hand side with dealiasing on.
pub fn rhs(field: &StateField, state: &ConstantState) -> Result<StateField> {
    Solver::new(field.grid, *state, true)?
        .rhs(field)
        .ok_or(AbiError::BlowUp { t: f64::NAN, what: "non-finite right-hand side".into() })
}

/// One RK4 step with dealiasing on.
pub fn step_rk4(field: &StateField, state: &ConstantState, dt: f64) -> Result<StateField> {
    Solver::new(field.grid, *state, true)?.step_rk4(field, dt, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{B, D, TAU, V};
    use crate::model::{admissible_perturbation, InitialKind, SpectralProfile};
    use crate::spectral::{assemble_a0, eigen_basis, Branch};

    fn grid() -> Grid {
        Grid::new(16, 16.0 * std::f64::consts::PI).unwrap()
    }

    #[test]
    fn zero_perturbation_has_zero_rhs() {
        let st = ConstantState::new(1.2, [0.3, 0.0, 0.1], [0.5, 0.2, 0.0], [0.0, -0.4, 0.3]).unwrap();
        let r = rhs(&StateField::zeros(grid()), &st).unwrap();
        assert!(r.max_abs() < 1e-15);
    }

    /// Plane wave `a Re(r e^{i k x})` with `r` an `E(+)` eigenvector: the
    /// linear part is `Re(i A0(k) r a e^{ikx})`.
    #[test]
    fn small_eigenmode_rhs_is_the_linear_symbol() {
        let st = ConstantState::new(0.9, [0.0; 3], [0.4, -0.1, 0.2], [0.1, 0.3, 0.0]).unwrap();
        let g = grid();
        let n = [2i64, -1, 1];
        let k = Vec3::new(n[0] as f64, n[1] as f64, n[2] as f64) * (2.0 * std::f64::consts::PI / g.length);
        let r = eigen_basis(&k, &st).unwrap().vectors(Branch::Plus)[0];
        let a0 = assemble_a0(&k, &st).m;
        let lin = a0 * r;
        for amp in [1e-3, 1e-5] {
            let m = g.len();
            let mut u = StateField::zeros(g);
            let mut want = StateField::zeros(g);
            for idx in 0..m {
                let ph = k.dot(&g.position(idx));
                for c in 0..NCOMP {
                    u.data[c * m + idx] = amp * r[c] * ph.cos();
                    // Re(i z e^{i ph}) = -z sin(ph) for real z
                    want.data[c * m + idx] = -amp * lin[c] * ph.sin();
                }
            }
            let got = rhs(&u, &st).unwrap();
            let rel = got.max_abs_diff(&want) / want.max_abs();
            assert!(rel < 10.0 * amp, "amp {amp}: {rel}");
        }
    }

    #[test]
    fn chaplygin_channel_stays_exactly_zero() {
        let st = ConstantState::isotropic(1.0);
        let g = grid();
        let prof = SpectralProfile { kind: InitialKind::Chaplygin, ..Default::default() };
        let u = admissible_perturbation(3, 0.05, &prof, &st, &g).unwrap();
        let r = rhs(&u, &st).unwrap();
        for c in B.iter().chain(&D) {
            assert!(r.component(*c).iter().all(|x| *x == 0.0));
        }
        assert!(r.component(TAU).iter().any(|x| x.abs() > 0.0));
        assert!(r.component(V[0]).iter().any(|x| x.abs() > 0.0));
    }

    #[test]
    fn rk4_of_zero_is_zero() {
        let st = ConstantState::isotropic(1.0);
        let u = step_rk4(&StateField::zeros(grid()), &st, 0.1).unwrap();
        assert_eq!(u.max_abs(), 0.0);
    }

    #[test]
    fn blow_up_is_reported() {
        let st = ConstantState::isotropic(1.0);
        let g = grid();
        let mut u = StateField::zeros(g);
        u.component_mut(TAU)[5] = f64::NAN;
        assert!(matches!(Solver::new(g, st, true).unwrap().step_rk4(&u, 0.1, 2.0), Err(AbiError::BlowUp { .. })));
    }

    #[test]
    fn projection_is_idempotent_and_keeps_only_the_box() {
        let st = ConstantState::isotropic(1.0);
        let g = grid();
        let mut u = StateField::zeros(g);
        for (i, x) in u.data.iter_mut().enumerate() {
            *x = ((i * 7919) % 101) as f64 / 101.0 - 0.5;
        }
        let s = Solver::new(g, st, true).unwrap();
        let p = s.project(&u);
        assert!(s.project(&p).max_abs_diff(&p) < 1e-14);
        let hat = p.to_spectral();
        for c in 0..NCOMP {
            for (i, z) in hat.component(c).iter().enumerate() {
                assert!(g.dealias_keep(i) || z.norm() < 1e-12);
            }
        }
        assert_eq!(Solver::new(g, st, false).unwrap().project(&u), u);
    }
}
