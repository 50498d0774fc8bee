//! Pointwise form of the ABI right-hand side and of the constraint
//! expressions.
//!
//! Both are bilinear in the state `U` and the gradient `G`, with
//! `G[c][j] = d_j u_c`. Evaluated at the absolute state they give the full
//! nonlinear flux; evaluated at a perturbation they give its quadratic part.

use crate::grid::{B, D, TAU, V};
use crate::NCOMP;

pub type Gradient = [[f64; 3]; NCOMP];

fn dir_deriv(w: &[f64; NCOMP], idx: [usize; 3], g: &Gradient, c: usize) -> f64 {
    (0..3).map(|j| w[idx[j]] * g[c][j]).sum()
}

fn curl(g: &Gradient, f: [usize; 3], m: usize) -> f64 {
    let (a, b) = ((m + 1) % 3, (m + 2) % 3);
    g[f[b]][a] - g[f[a]][b]
}

/// `d/dt U` at one point:
///
/// ```text
/// tau: -v.grad tau + tau div v
/// v:   -v.grad v + b.grad b + d.grad d + tau grad tau
/// b:   -v.grad b + b.grad v - tau curl d
/// d:   -v.grad d + d.grad v + tau curl b
/// ```
pub fn flux(w: &[f64; NCOMP], g: &Gradient) -> [f64; NCOMP] {
    let tau = w[TAU];
    let mut out = [0.0; NCOMP];
    out[TAU] = -dir_deriv(w, V, g, TAU) + tau * (0..3).map(|j| g[V[j]][j]).sum::<f64>();
    for m in 0..3 {
        out[V[m]] = -dir_deriv(w, V, g, V[m]) + dir_deriv(w, B, g, B[m]) + dir_deriv(w, D, g, D[m]) + tau * g[TAU][m];
        out[B[m]] = -dir_deriv(w, V, g, B[m]) + dir_deriv(w, B, g, V[m]) - tau * curl(g, D, m);
        out[D[m]] = -dir_deriv(w, V, g, D[m]) + dir_deriv(w, D, g, V[m]) + tau * curl(g, B, m);
    }
    out
}

/// Constraint expressions at one point, zero for exact solutions:
///
/// ```text
/// tau div b - b.grad tau
/// tau div d - d.grad tau
/// tau curl v - b.grad d + d.grad b
/// ```
pub fn constraints(w: &[f64; NCOMP], g: &Gradient) -> [f64; 5] {
    let tau = w[TAU];
    let div = |f: [usize; 3]| (0..3).map(|j| g[f[j]][j]).sum::<f64>();
    let mut out = [0.0; 5];
    out[0] = tau * div(B) - dir_deriv(w, B, g, TAU);
    out[1] = tau * div(D) - dir_deriv(w, D, g, TAU);
    for m in 0..3 {
        out[2 + m] = tau * curl(g, V, m) - dir_deriv(w, B, g, D[m]) + dir_deriv(w, D, g, B[m]);
    }
    out
}

fn unit_pair(i: usize, k: usize, j: usize) -> ([f64; NCOMP], Gradient) {
    let mut w = [0.0; NCOMP];
    w[i] = 1.0;
    let mut g = [[0.0; 3]; NCOMP];
    g[k][j] = 1.0;
    (w, g)
}

/// Coefficient of `u_i d_j u_k` in output `o` of [`flux`].
pub fn flux_coefficient(o: usize, i: usize, k: usize, j: usize) -> f64 {
    let (w, g) = unit_pair(i, k, j);
    flux(&w, &g)[o]
}

/// Coefficient of `u_i d_j u_k` in the quadratic constraint right-hand side
/// `N'`, i.e. minus the coefficient in [`constraints`].
pub fn constraint_coefficient(o: usize, i: usize, k: usize, j: usize) -> f64 {
    let (w, g) = unit_pair(i, k, j);
    -constraints(&w, &g)[o]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{lift_point, ConstantState};
    use crate::spectral::{assemble_a0, assemble_l0};
    use crate::Vec3;

    #[test]
    fn linearisation_reproduces_a0() {
        // flux(U0, G) for G = xi_j e_k gives A0(xi) column k
        let s = ConstantState { b0: [0.3, -0.7, 0.2], d0: [0.5, 0.1, -0.4], ..ConstantState::isotropic(1.3) };
        let xi = Vec3::new(0.4, -1.1, 0.6);
        let a0 = assemble_a0(&xi, &s).m;
        let u0 = s.as_vector();
        for k in 0..NCOMP {
            let mut g = [[0.0; 3]; NCOMP];
            g[k] = [xi[0], xi[1], xi[2]];
            let col = flux(&u0, &g);
            for o in 0..NCOMP {
                assert!((col[o] - a0[(o, k)]).abs() < 1e-14, "({o},{k})");
            }
        }
    }

    #[test]
    fn constraint_linearisation_matches_l0_kernel_structure() {
        let s = ConstantState { b0: [0.3, -0.7, 0.2], d0: [0.5, 0.1, -0.4], ..ConstantState::isotropic(1.3) };
        let xi = Vec3::new(0.4, -1.1, 0.6);
        let l0 = assemble_l0(&xi, &s).m;
        let u0 = s.as_vector();
        for k in 0..NCOMP {
            let mut g = [[0.0; 3]; NCOMP];
            g[k] = [xi[0], xi[1], xi[2]];
            let col = constraints(&u0, &g);
            // the two divergence rows carry the opposite sign to the displayed L0
            assert!((col[0] + l0[(0, k)]).abs() < 1e-14);
            assert!((col[1] + l0[(1, k)]).abs() < 1e-14);
            for m in 0..3 {
                assert!((col[2 + m] - l0[(2 + m, k)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn constant_states_are_steady() {
        let w = lift_point(&Vec3::new(0.2, 0.1, -0.3), &Vec3::new(0.0, 0.5, 0.1));
        let g = [[0.0; 3]; NCOMP];
        assert!(flux(&w, &g).iter().all(|x| *x == 0.0));
        assert!(constraints(&w, &g).iter().all(|x| *x == 0.0));
    }

    #[test]
    fn coefficients_are_unit_or_zero() {
        let mut count = 0;
        for o in 0..NCOMP {
            for i in 0..NCOMP {
                for k in 0..NCOMP {
                    for j in 0..3 {
                        let c = flux_coefficient(o, i, k, j);
                        assert!(c == 0.0 || c.abs() == 1.0);
                        count += (c != 0.0) as usize;
                    }
                }
            }
        }
        // tau: 6, each v_m: 10, each b_m and d_m: 8
        assert_eq!(count, 6 + 3 * 10 + 6 * 8);
        assert_eq!(constraint_coefficient(0, TAU, B[1], 1), -1.0);
        assert_eq!(constraint_coefficient(0, B[1], TAU, 1), 1.0);
    }
}
