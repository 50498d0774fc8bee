//! The twelve generators of the ideal describing space-resonant
//! configurations of an interaction.

use num_bigint::BigInt;

use crate::error::{AbiError, Result};
use crate::resonance::InteractionSpec;
use crate::spectral::Branch;

use super::layout::{FrequencyVars, LAYOUT};
use super::poly::{IntPolynomial, NVARS};

/// `P1..P12` for orientation sign `s = eps2 eps3`.
///
/// `P1..P6`: unit-sum relations of the three directions and the three
/// `(alpha, beta, delta)` triples. `P7..P9 = X_{3+i} - s X_{6+i}`,
/// `P10 = X13 - X16`, `P11 = X14 - s X17`, `P12 = X15 - s X18`.
#[derive(Clone, Debug, PartialEq)]
pub struct Generators {
    pub s: i8,
    pub polys: [IntPolynomial; 12],
}

/// A generator of the form `X_keep - sign * X_elim`, used as a substitution
/// `X_elim -> sign * X_keep`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Substitution {
    /// Zero-based index of the generator (6..=11).
    pub generator: usize,
    pub elim: usize,
    pub keep: usize,
    pub sign: i8,
}

/// A generator `X_a^2 + X_b^2 + X_c^2 - 1`, used as the rewrite
/// `X_c^2 -> 1 - X_a^2 - X_b^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SphereRule {
    /// Zero-based index of the generator (0..=5).
    pub generator: usize,
    pub a: usize,
    pub b: usize,
    pub c: usize,
}

fn sphere(vars: [usize; 3]) -> IntPolynomial {
    let mut p = IntPolynomial::constant(-1);
    for v in vars {
        let mut e = [0u8; NVARS];
        e[v] = 2;
        p.add_term(e, BigInt::from(1));
    }
    p
}

fn linear(keep: usize, elim: usize, sign: i8) -> IntPolynomial {
    IntPolynomial::var(keep).sub(&IntPolynomial::var(elim).scale_int(&BigInt::from(sign)))
}

impl Generators {
    pub fn for_sign(s: i8) -> Self {
        assert!(s == 1 || s == -1);
        let polys = std::array::from_fn(|i| {
            if i < 6 {
                let r = Self::sphere_rules()[i];
                sphere([r.a, r.b, r.c])
            } else {
                let sub = Self::substitutions(s)[i - 6];
                linear(sub.keep, sub.elim, sub.sign)
            }
        });
        Self { s, polys }
    }

    pub fn sphere_rules() -> [SphereRule; 6] {
        let rule = |generator: usize, v: [usize; 3]| SphereRule { generator, a: v[0], b: v[1], c: v[2] };
        let l = LAYOUT;
        [
            rule(0, l.xi.dir),
            rule(1, l.eta.dir),
            rule(2, l.diff.dir),
            rule(3, l.xi.abd),
            rule(4, l.eta.abd),
            rule(5, l.diff.abd),
        ]
    }

    /// Stage-one substitutions in generator order `P7..P12`.
    pub fn substitutions(s: i8) -> [Substitution; 6] {
        let (e, d): (FrequencyVars, FrequencyVars) = (LAYOUT.eta, LAYOUT.diff);
        let sub = |generator: usize, keep: usize, elim: usize, sign: i8| Substitution { generator, elim, keep, sign };
        [
            sub(6, e.dir[0], d.dir[0], s),
            sub(7, e.dir[1], d.dir[1], s),
            sub(8, e.dir[2], d.dir[2], s),
            // alpha is even in the frequency
            sub(9, e.abd[0], d.abd[0], 1),
            sub(10, e.abd[1], d.abd[1], s),
            sub(11, e.abd[2], d.abd[2], s),
        ]
    }

    pub fn eval(&self, x: &[f64; NVARS]) -> [f64; 12] {
        std::array::from_fn(|i| self.polys[i].eval_coefficients(x))
    }
}

/// Generators for an interaction; requires `eps2, eps3` in `{+, -}`.
pub fn build_ideal_generators(spec: &InteractionSpec) -> Result<Generators> {
    if spec.eps2 == Branch::Zero || spec.eps3 == Branch::Zero {
        return Err(AbiError::Unsupported(format!("ideal needs eps2, eps3 in {{+,-}}, got {spec}")));
    }
    Ok(Generators::for_sign(spec.s() as i8))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ConstantState;
    use crate::resonance::random_state;
    use crate::Vec3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn orientation_sign_examples() {
        let pp = build_ideal_generators(&"+,++".parse().unwrap()).unwrap();
        assert_eq!(pp.s, 1);
        assert_eq!(pp.polys[6].to_string(), "1 * X4 - 1 * X7");
        let pm = build_ideal_generators(&"+,+-".parse().unwrap()).unwrap();
        assert_eq!(pm.s, -1);
        assert_eq!(pm.polys[6].to_string(), "1 * X4 + 1 * X7");
        assert_eq!(pm.polys[9].to_string(), "1 * X13 - 1 * X16");
        assert!(build_ideal_generators(&"+,+0".parse().unwrap()).is_err());
    }

    #[test]
    fn generators_vanish_on_resonant_embeddings_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for s in [1i8, -1] {
            let g = Generators::for_sign(s);
            let mut worst: f64 = 0.0;
            for _ in 0..1000 {
                let st = random_state(&mut rng);
                let eta =
                    Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                let lam = rng.random_range(0.05..3.0);
                let xi = eta * (1.0 + s as f64 * lam);
                if xi.norm() < 1e-3 || eta.norm() < 1e-3 {
                    continue;
                }
                let x = LAYOUT.embed(&xi, &eta, &st).unwrap();
                worst = g.eval(&x).iter().fold(worst, |w, v| w.max(v.abs()));
            }
            assert!(worst <= 1e-10, "s = {s}: {worst}");
            // a generic point satisfies the unit relations but not the linear ones
            let st = ConstantState::isotropic(1.0);
            let x = LAYOUT.embed(&Vec3::new(1.0, 0.2, 0.0), &Vec3::new(0.0, 1.0, 0.3), &st).unwrap();
            let v = g.eval(&x);
            assert!(v[..6].iter().all(|r| r.abs() < 1e-12));
            assert!(v[6..9].iter().any(|r| r.abs() > 1e-2));
        }
    }
}
