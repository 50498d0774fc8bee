//! Two-stage rewrite modulo the resonance ideal.
//!
//! Stage one eliminates `X7, X8, X9, X16, X17, X18` by the linear
//! generators; stage two lowers `X3, X6, X12, X15` to degree at most one by
//! the unit-sum relations. The leading monomials of the stage-two rules are
//! pairwise coprime, so the normal form does not depend on the order in which
//! terms are processed.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;

use super::ideal::{Generators, SphereRule, Substitution};
use super::poly::{Exponent, IntPolynomial};
use crate::error::{AbiError, Result};

/// Stage-two rules actually used: the unit-sum relations whose variables
/// survive stage one.
fn live_sphere_rules() -> Vec<SphereRule> {
    let elim: Vec<usize> = Generators::substitutions(1).iter().map(|s| s.elim).collect();
    Generators::sphere_rules().into_iter().filter(|r| !elim.contains(&r.c)).collect()
}

fn add_into(map: &mut BTreeMap<Exponent, BigInt>, e: Exponent, c: BigInt) {
    if c.is_zero() {
        return;
    }
    let slot = map.entry(e).or_insert_with(BigInt::zero);
    *slot += c;
    if slot.is_zero() {
        map.remove(&e);
    }
}

fn substitute_term(e: &Exponent, c: &BigInt, subs: &[Substitution]) -> (Exponent, BigInt) {
    let mut out = *e;
    let mut c = c.clone();
    for s in subs {
        let k = out[s.elim];
        if k > 0 {
            out[s.keep] += k;
            out[s.elim] = 0;
            if s.sign < 0 && k % 2 == 1 {
                c = -c;
            }
        }
    }
    (out, c)
}

/// Cofactor contribution of replacing `X_b^k` by `(s X_a)^k` in `c * m X_b^k`:
/// `c m X_b^k = c m (s X_a)^k + P * (-s c m sum_{j<k} X_b^j (s X_a)^{k-1-j})`
/// with `P = X_a - s X_b`.
fn stage_one_cofactor(q: &mut BTreeMap<Exponent, BigInt>, m: &Exponent, c: &BigInt, sub: &Substitution, k: u8) {
    let s = sub.sign as i64;
    for j in 0..k {
        let mut e = *m;
        e[sub.elim] += j;
        e[sub.keep] += k - 1 - j;
        let sign = if (k - 1 - j) % 2 == 1 { s } else { 1 };
        add_into(q, e, c * BigInt::from(-s * sign));
    }
}

/// Normal form and, when requested, cofactors `Q1..Q12` with
/// `p = sum Q_i P_i + reduce(p)`.
pub fn reduce_with_cofactors(
    p: &IntPolynomial,
    gens: &Generators,
    want_cofactors: bool,
) -> (IntPolynomial, Option<[IntPolynomial; 12]>) {
    let subs = Generators::substitutions(gens.s);
    let mut q: [BTreeMap<Exponent, BigInt>; 12] = Default::default();

    // stage one, one substitution at a time so cofactors stay exact
    let mut cur: BTreeMap<Exponent, BigInt> = BTreeMap::new();
    if want_cofactors {
        let mut work: BTreeMap<Exponent, BigInt> = p.terms().map(|(e, c)| (*e, c.clone())).collect();
        for sub in &subs {
            let mut next = BTreeMap::new();
            for (e, c) in work {
                let k = e[sub.elim];
                if k == 0 {
                    add_into(&mut next, e, c);
                    continue;
                }
                let mut m = e;
                m[sub.elim] = 0;
                stage_one_cofactor(&mut q[sub.generator], &m, &c, sub, k);
                let (ne, nc) = substitute_term(&e, &c, std::slice::from_ref(sub));
                add_into(&mut next, ne, nc);
            }
            work = next;
        }
        cur = work;
    } else {
        for (e, c) in p.terms() {
            let (ne, nc) = substitute_term(e, c, &subs);
            add_into(&mut cur, ne, nc);
        }
    }

    // stage two
    let rules = live_sphere_rules();
    let mut done: BTreeMap<Exponent, BigInt> = BTreeMap::new();
    while !cur.is_empty() {
        let mut next = BTreeMap::new();
        for (e, c) in cur {
            match rules.iter().find(|r| e[r.c] >= 2) {
                None => add_into(&mut done, e, c),
                Some(r) => {
                    let mut base = e;
                    base[r.c] -= 2;
                    if want_cofactors {
                        add_into(&mut q[r.generator], base, c.clone());
                    }
                    let mut ea = base;
                    ea[r.a] += 2;
                    let mut eb = base;
                    eb[r.b] += 2;
                    add_into(&mut next, ea, -c.clone());
                    add_into(&mut next, eb, -c.clone());
                    add_into(&mut next, base, c);
                }
            }
        }
        cur = next;
    }
    let meta = (p.scale_log2, p.i_power);
    let nf = IntPolynomial::from_terms(done, meta.0, meta.1);
    let cof = want_cofactors.then(|| q.map(|m| IntPolynomial::from_terms(m, meta.0, meta.1)));
    (nf, cof)
}

/// Normal form of `p` modulo the generators.
pub fn reduce(p: &IntPolynomial, gens: &Generators) -> IntPolynomial {
    reduce_with_cofactors(p, gens, false).0
}

/// Cofactors `Q1..Q12` of a residue-zero polynomial, checked by exact
/// re-expansion `p = sum Q_i P_i`.
pub fn extract_cofactors(p: &IntPolynomial, gens: &Generators) -> Result<[IntPolynomial; 12]> {
    let (nf, q) = reduce_with_cofactors(p, gens, true);
    if !nf.is_zero() {
        return Err(AbiError::Unavailable(format!("residue is non-zero ({} terms)", nf.len())));
    }
    let q = q.expect("cofactors requested");
    let resum = recombine(&q, gens, p.scale_log2, p.i_power);
    if resum.sub(p).is_zero() {
        Ok(q)
    } else {
        Err(AbiError::Unavailable("cofactor re-expansion failed".into()))
    }
}

/// `sum Q_i P_i`.
pub fn recombine(q: &[IntPolynomial; 12], gens: &Generators, scale_log2: u32, i_power: u8) -> IntPolynomial {
    let mut acc = IntPolynomial::zero().with_meta(scale_log2, i_power);
    for (qi, pi) in q.iter().zip(&gens.polys) {
        acc.add_product(qi, pi);
    }
    acc
}

/// True when no surviving monomial contains a rewritten power.
pub fn is_normal(p: &IntPolynomial, gens: &Generators) -> bool {
    let subs = Generators::substitutions(gens.s);
    let rules = live_sphere_rules();
    p.terms().all(|(e, _)| subs.iter().all(|s| e[s.elim] == 0) && rules.iter().all(|r| e[r.c] <= 1))
}
