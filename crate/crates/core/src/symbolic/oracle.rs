//! Floating-point composition of the interaction tensors, built only from
//! the pointwise flux and the numeric projectors. Independent of the
//! polynomial route in `tensor`.

use crate::error::Result;
use crate::model::ConstantState;
use crate::quasilinear::{constraint_coefficient, flux_coefficient};
use crate::resonance::InteractionSpec;
use crate::spectral::projector;
use crate::{Mat10, Vec3, NCOMP};

use super::tensor::TensorKind;

/// Real order-zero symbol `[out][k][i]`, row-major, without the factor `i`.
pub fn float_tensor(
    spec: &InteractionSpec,
    kind: TensorKind,
    xi: &Vec3,
    eta: &Vec3,
    state: &ConstantState,
) -> Result<Vec<f64>> {
    let z = xi - eta;
    let w = z / z.norm();
    let p2: Mat10 = projector(&z, state, spec.eps2)?.m;
    let p3: Mat10 = projector(eta, state, spec.eps3)?.m;
    let rows = kind.rows();
    let coeff = |o: usize, i: usize, k: usize, j: usize| match kind {
        TensorKind::N => flux_coefficient(o, i, k, j),
        TensorKind::Nprime => constraint_coefficient(o, i, k, j),
    };
    // symbol of the unprojected form, b[o][k'][i']
    let mut b = vec![0.0; rows * NCOMP * NCOMP];
    for o in 0..rows {
        for kp in 0..NCOMP {
            for ip in 0..NCOMP {
                b[(o * NCOMP + kp) * NCOMP + ip] = (0..3).map(|j| coeff(o, ip, kp, j) * w[j]).sum();
            }
        }
    }
    let mut inner = vec![0.0; rows * NCOMP * NCOMP];
    for o in 0..rows {
        for k in 0..NCOMP {
            for i in 0..NCOMP {
                let mut acc = 0.0;
                for kp in 0..NCOMP {
                    for ip in 0..NCOMP {
                        acc += b[(o * NCOMP + kp) * NCOMP + ip] * p2[(kp, k)] * p3[(ip, i)];
                    }
                }
                inner[(o * NCOMP + k) * NCOMP + i] = acc;
            }
        }
    }
    if kind == TensorKind::Nprime {
        return Ok(inner);
    }
    let p1: Mat10 = projector(xi, state, spec.eps1)?.m;
    let mut out = vec![0.0; NCOMP * NCOMP * NCOMP];
    for o in 0..NCOMP {
        for rest in 0..NCOMP * NCOMP {
            out[o * NCOMP * NCOMP + rest] = (0..NCOMP).map(|op| p1[(o, op)] * inner[op * NCOMP * NCOMP + rest]).sum();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Branch;

    #[test]
    fn total_projection_recovers_the_raw_symbol() {
        // summing over all branch triples sums the projectors to the identity
        let st = ConstantState::new(1.3, [0.1, 0.0, 0.0], [0.3, -0.2, 0.1], [0.0, 0.4, 0.2]).unwrap();
        let (xi, eta) = (Vec3::new(0.7, -0.3, 0.4), Vec3::new(-0.2, 0.5, 0.9));
        let mut sum = vec![0.0; NCOMP * NCOMP * NCOMP];
        for e1 in Branch::ALL {
            for e2 in Branch::ALL {
                for e3 in Branch::ALL {
                    let t =
                        float_tensor(&InteractionSpec { eps1: e1, eps2: e2, eps3: e3 }, TensorKind::N, &xi, &eta, &st)
                            .unwrap();
                    sum.iter_mut().zip(&t).for_each(|(s, v)| *s += v);
                }
            }
        }
        let z = xi - eta;
        let w = z / z.norm();
        for o in 0..NCOMP {
            for k in 0..NCOMP {
                for i in 0..NCOMP {
                    let raw: f64 = (0..3).map(|j| flux_coefficient(o, i, k, j) * w[j]).sum();
                    assert!((sum[(o * NCOMP + k) * NCOMP + i] - raw).abs() < 1e-12);
                }
            }
        }
    }
}
