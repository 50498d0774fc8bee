//! Assignment of the 18 polynomial variables to normalised frequency data.
//!
//! | variables   | meaning                                  |
//! |-------------|------------------------------------------|
//! | X1..X3      | `xi / |xi|`                              |
//! | X4..X6      | `eta / |eta|`                            |
//! | X7..X9      | `(xi - eta) / |xi - eta|`                |
//! | X10..X12    | `(alpha, beta, delta)(xi)`               |
//! | X13..X15    | `(alpha, beta, delta)(eta)`              |
//! | X16..X18    | `(alpha, beta, delta)(xi - eta)`         |

use crate::error::{AbiError, Result};
use crate::model::{alpha_beta_delta, ConstantState};
use crate::Vec3;

use super::poly::NVARS;

/// Zero-based variable indices of one frequency: unit direction and
/// `(alpha, beta, delta)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrequencyVars {
    pub dir: [usize; 3],
    pub abd: [usize; 3],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VariableLayout {
    pub xi: FrequencyVars,
    pub eta: FrequencyVars,
    pub diff: FrequencyVars,
}

pub const LAYOUT: VariableLayout = VariableLayout {
    xi: FrequencyVars { dir: [0, 1, 2], abd: [9, 10, 11] },
    eta: FrequencyVars { dir: [3, 4, 5], abd: [12, 13, 14] },
    diff: FrequencyVars { dir: [6, 7, 8], abd: [15, 16, 17] },
};

impl VariableLayout {
    /// The numeric point `iota(xi, eta)`.
    pub fn embed(&self, xi: &Vec3, eta: &Vec3, state: &ConstantState) -> Result<[f64; NVARS]> {
        let mut x = [0.0; NVARS];
        for (f, vars) in [(xi, &self.xi), (eta, &self.eta), (&(xi - eta), &self.diff)] {
            let n = f.norm();
            if n == 0.0 {
                return Err(AbiError::Domain("embedding needs xi, eta, xi - eta all non-zero".into()));
            }
            let (a, b, d) = alpha_beta_delta(f, state)?;
            for c in 0..3 {
                x[vars.dir[c]] = f[c] / n;
            }
            x[vars.abd[0]] = a;
            x[vars.abd[1]] = b;
            x[vars.abd[2]] = d;
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_covers_every_variable_once() {
        let mut seen = [false; NVARS];
        for f in [LAYOUT.xi, LAYOUT.eta, LAYOUT.diff] {
            for v in f.dir.iter().chain(&f.abd) {
                assert!(!seen[*v]);
                seen[*v] = true;
            }
        }
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn embedding_of_a_simple_point() {
        let s = ConstantState::isotropic(1.0);
        let x = LAYOUT.embed(&Vec3::new(2.0, 0.0, 0.0), &Vec3::new(0.0, 1.0, 0.0), &s).unwrap();
        assert_eq!(&x[0..3], &[1.0, 0.0, 0.0]);
        assert_eq!(&x[3..6], &[0.0, 1.0, 0.0]);
        let r = 1.0 / 5f64.sqrt();
        assert!((x[6] - 2.0 * r).abs() < 1e-15 && (x[7] + r).abs() < 1e-15);
        assert_eq!(x[9], 1.0);
        assert!(LAYOUT.embed(&Vec3::x(), &Vec3::x(), &s).is_err());
    }
}
