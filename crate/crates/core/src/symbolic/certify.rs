//! Exact certificates that projected interaction tensors vanish on the
//! space-resonant set.

use std::time::Instant;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AbiError, Result};
use crate::resonance::{random_off_axis_point, random_state, InteractionSpec};
use crate::Vec3;

use super::ideal::{build_ideal_generators, Generators};
use super::layout::LAYOUT;
use super::oracle::float_tensor;
use super::poly::{format_monomial, IntPolynomial};
use super::reduce::{extract_cofactors, reduce};
use super::tensor::{build_interaction_tensor, InteractionTensor, TensorKind};

/// Number of non-zero residues reported by name.
pub const MAX_WITNESSES: usize = 8;

/// Tolerance of the polynomial-versus-float gate, relative to the largest
/// entry.
pub const PREFLIGHT_TENSOR_TOL: f64 = 1e-8;

/// Tolerance of the generator-annihilation gate.
pub const PREFLIGHT_IDEAL_TOL: f64 = 1e-10;

/// A surviving residue: entry `[out, k, i]` and its leading monomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub entry: [usize; 3],
    pub monomial: String,
    pub coefficient: String,
    pub terms: usize,
}

/// Cofactors `Q1..Q12` of one entry, so that `entry = sum Q_i P_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryCofactors {
    pub entry: [usize; 3],
    pub cofactors: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub interaction: String,
    pub which: TensorKind,
    pub orientation: i8,
    pub scale_log2: u32,
    pub i_power: u8,
    pub entries_total: usize,
    /// Entries that are non-zero polynomials before reduction.
    pub entries_structural: usize,
    /// Entries whose normal form is non-zero.
    pub entries_nonzero: usize,
    pub witnesses: Vec<Witness>,
    pub max_degree: u32,
    pub terms_max: usize,
    pub millis: u128,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cofactors: Option<Vec<EntryCofactors>>,
}

impl Certificate {
    pub fn residue_zero(&self) -> bool {
        self.entries_nonzero == 0
    }
}

/// Reduce every entry of `t` modulo `gens`. Cofactors are only attempted
/// when every residue is zero.
pub fn certify_tensor(t: &InteractionTensor, gens: &Generators, with_cofactors: bool) -> Result<Certificate> {
    let start = Instant::now();
    let residues: Vec<IntPolynomial> = t.entries.par_iter().map(|p| reduce(p, gens)).collect();
    let mut witnesses = Vec::new();
    let mut nonzero = 0;
    for (idx, r) in residues.iter().enumerate() {
        if r.is_zero() {
            continue;
        }
        nonzero += 1;
        if witnesses.len() < MAX_WITNESSES {
            let (e, c) = r.leading().expect("non-zero residue");
            witnesses.push(Witness {
                entry: t.labels(idx),
                monomial: format_monomial(e),
                coefficient: c.to_string(),
                terms: r.len(),
            });
        }
    }
    let cofactors = if with_cofactors && nonzero == 0 {
        let list: Result<Vec<EntryCofactors>> = t
            .entries
            .par_iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(idx, p)| {
                let q = extract_cofactors(p, gens)?;
                Ok(EntryCofactors { entry: t.labels(idx), cofactors: q.iter().map(|x| x.to_string()).collect() })
            })
            .collect();
        Some(list?)
    } else {
        None
    };
    Ok(Certificate {
        interaction: t.spec.to_string(),
        which: t.kind,
        orientation: gens.s,
        scale_log2: t.scale_log2,
        i_power: t.i_power,
        entries_total: t.entries.len(),
        entries_structural: t.entries.iter().filter(|p| !p.is_zero()).count(),
        entries_nonzero: nonzero,
        witnesses,
        max_degree: t.max_degree(),
        terms_max: t.terms_max(),
        millis: start.elapsed().as_millis(),
        cofactors,
    })
}

/// Build, reduce and certify one interaction tensor.
pub fn certify(spec: &InteractionSpec, kind: TensorKind, with_cofactors: bool) -> Result<Certificate> {
    let gens = build_ideal_generators(spec)?;
    let t = build_interaction_tensor(spec, kind)?;
    certify_tensor(&t, &gens, with_cofactors)
}

/// Add the constant `1` to the entry at flat index `idx`, for negative
/// controls.
pub fn mutate_entry(t: &mut InteractionTensor, idx: usize) -> Result<()> {
    let n = t.entries.len();
    let e = t.entries.get_mut(idx).ok_or_else(|| AbiError::Config(format!("entry {idx} out of range 0..{n}")))?;
    let mut one = IntPolynomial::zero().with_meta(e.scale_log2, e.i_power);
    one.add_term([0; super::poly::NVARS], BigInt::from(1));
    *e = e.add(&one);
    Ok(())
}

/// Outcome of the numeric gates run before a certification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreflightReport {
    pub samples: usize,
    /// Largest generator value on sampled resonant points.
    pub ideal_max: f64,
    /// Largest polynomial-versus-float discrepancy on generic points,
    /// relative to the largest entry.
    pub tensor_rel_max: f64,
    /// Largest tensor entry on sampled resonant points, relative to its
    /// largest entry at generic points.
    pub resonant_rel_max: f64,
}

impl PreflightReport {
    pub fn passed(&self) -> bool {
        self.ideal_max <= PREFLIGHT_IDEAL_TOL && self.tensor_rel_max <= PREFLIGHT_TENSOR_TOL
    }
}

fn resonant_point<R: Rng + ?Sized>(rng: &mut R, s: f64) -> (Vec3, Vec3) {
    loop {
        let eta = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let lam: f64 = rng.random_range(0.05..3.0);
        let xi = eta * (1.0 + s * lam);
        if eta.norm() > 0.05 && xi.norm() > 0.05 {
            return (xi, eta);
        }
    }
}

/// Numeric gates: the generators vanish on resonant points, and the
/// polynomial tensor agrees with the independent float composition.
pub fn preflight(spec: &InteractionSpec, kind: TensorKind, samples: usize, seed: u64) -> Result<PreflightReport> {
    let gens = build_ideal_generators(spec)?;
    let t = build_interaction_tensor(spec, kind)?;
    preflight_tensor(&t, &gens, samples, seed)
}

pub fn preflight_tensor(
    t: &InteractionTensor,
    gens: &Generators,
    samples: usize,
    seed: u64,
) -> Result<PreflightReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let full = t.outs.len() == t.kind.rows() && t.slots.len() == crate::NCOMP;
    let mut ideal_max: f64 = 0.0;
    let mut tensor_rel_max: f64 = 0.0;
    let mut resonant_rel_max: f64 = 0.0;
    for _ in 0..samples {
        let st = random_state(&mut rng);
        let (xi, eta) = random_off_axis_point(&mut rng);
        let x = LAYOUT.embed(&xi, &eta, &st)?;
        let sym = t.eval_real(&x);
        let scale = sym.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        if full {
            let flt = float_tensor(&t.spec, t.kind, &xi, &eta, &st)?;
            let err = sym.iter().zip(&flt).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            tensor_rel_max = tensor_rel_max.max(err / scale);
        }
        let (rx, re) = resonant_point(&mut rng, gens.s as f64);
        let y = LAYOUT.embed(&rx, &re, &st)?;
        ideal_max = gens.eval(&y).iter().fold(ideal_max, |m, v| m.max(v.abs()));
        let on = t.eval_real(&y);
        resonant_rel_max = on.iter().fold(resonant_rel_max, |m, v| m.max(v.abs() / scale));
    }
    Ok(PreflightReport { samples, ideal_max, tensor_rel_max, resonant_rel_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::tensor::CHAPLYGIN_COMPONENTS;

    #[test]
    fn preflight_gates_pass() {
        for (spec, kind) in [("+,++", TensorKind::N), ("-,+-", TensorKind::N), ("+,-+", TensorKind::Nprime)] {
            let r = preflight(&spec.parse().unwrap(), kind, 20, 5).unwrap();
            assert!(r.passed(), "{spec} {kind}: {r:?}");
            assert!(r.resonant_rel_max < 1e-8, "{spec} {kind}: {r:?}");
        }
    }

    #[test]
    fn chaplygin_block_certifies() {
        for spec in InteractionSpec::all_wave() {
            let gens = build_ideal_generators(&spec).unwrap();
            let t = build_interaction_tensor(&spec, TensorKind::N).unwrap();
            let sub = t.restrict(&CHAPLYGIN_COMPONENTS, &CHAPLYGIN_COMPONENTS).unwrap();
            let c = certify_tensor(&sub, &gens, true).unwrap();
            assert!(c.residue_zero(), "{spec}: {:?}", c.witnesses);
            assert_eq!(c.entries_total, 64);
        }
    }

    #[test]
    fn mutation_is_detected_and_named() {
        let spec: InteractionSpec = "+,++".parse().unwrap();
        let gens = build_ideal_generators(&spec).unwrap();
        let mut t = build_interaction_tensor(&spec, TensorKind::N).unwrap();
        let idx = t.index(1, 2, 3);
        mutate_entry(&mut t, idx).unwrap();
        let c = certify_tensor(&t, &gens, true).unwrap();
        assert_eq!(c.entries_nonzero, 1);
        assert_eq!(c.witnesses[0].entry, [1, 2, 3]);
        assert!(c.cofactors.is_none());
        assert!(mutate_entry(&mut t, 5000).is_err());
    }

    #[test]
    fn certificate_json_round_trip() {
        let spec: InteractionSpec = "-,-+".parse().unwrap();
        let c = certify(&spec, TensorKind::Nprime, false).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        let back: Certificate = serde_json::from_str(&s).unwrap();
        assert_eq!(back.interaction, "-,-+");
        assert_eq!(back.entries_nonzero, c.entries_nonzero);
    }
}
