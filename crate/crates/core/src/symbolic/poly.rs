//! Sparse multivariate polynomials in 18 variables with big-integer
//! coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub const NVARS: usize = 18;

/// Exponent vector; index `v` is variable `X_{v+1}`.
pub type Exponent = [u8; NVARS];

/// `i^i_power / 2^scale_log2 * sum_m c_m X^m`.
///
/// Zero coefficients are never stored and terms are kept in lexicographic
/// exponent order, so two equal polynomials have identical representations.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct IntPolynomial {
    terms: BTreeMap<Exponent, BigInt>,
    pub scale_log2: u32,
    pub i_power: u8,
}

impl IntPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: i64) -> Self {
        Self::monomial([0; NVARS], BigInt::from(c))
    }

    pub fn one() -> Self {
        Self::constant(1)
    }

    /// `X_{v+1}` (zero-based `v`).
    pub fn var(v: usize) -> Self {
        let mut e = [0; NVARS];
        e[v] = 1;
        Self::monomial(e, BigInt::one())
    }

    pub fn monomial(e: Exponent, c: BigInt) -> Self {
        let mut p = Self::zero();
        p.add_term(e, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &BigInt)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> BTreeMap<Exponent, BigInt> {
        self.terms
    }

    /// Rebuild from a term map, dropping zero coefficients.
    pub fn from_terms(terms: BTreeMap<Exponent, BigInt>, scale_log2: u32, i_power: u8) -> Self {
        let terms = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Self { terms, scale_log2, i_power }
    }

    pub fn add_term(&mut self, e: Exponent, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().map(|&x| x as u32).sum()).max()
    }

    /// Degree in a single variable.
    pub fn degree_in(&self, v: usize) -> u8 {
        self.terms.keys().map(|e| e[v]).max().unwrap_or(0)
    }

    /// Leading monomial in the stored (lexicographic) order.
    pub fn leading(&self) -> Option<(&Exponent, &BigInt)> {
        self.terms.iter().next_back()
    }

    fn aligned(&self, other: &Self) -> (BTreeMap<Exponent, BigInt>, BTreeMap<Exponent, BigInt>, u32) {
        assert_eq!(self.i_power % 4, other.i_power % 4, "adding polynomials with different powers of i");
        let s = self.scale_log2.max(other.scale_log2);
        let lift = |p: &Self| {
            let f = BigInt::one() << (s - p.scale_log2);
            p.terms.iter().map(|(e, c)| (*e, c * &f)).collect::<BTreeMap<_, _>>()
        };
        (lift(self), lift(other), s)
    }

    pub fn add(&self, other: &Self) -> Self {
        let (mut a, b, s) = self.aligned(other);
        let mut out = Self { terms: BTreeMap::new(), scale_log2: s, i_power: self.i_power % 4 };
        out.terms = std::mem::take(&mut a);
        for (e, c) in b {
            out.add_term(e, c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(), ..*self }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self {
            terms: BTreeMap::new(),
            scale_log2: self.scale_log2 + other.scale_log2,
            i_power: (self.i_power + other.i_power) % 4,
        };
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(exp_add(ea, eb), ca * cb);
            }
        }
        out
    }

    /// `self += a * b` on coefficients; metadata of `self` is kept.
    pub fn add_product(&mut self, a: &Self, b: &Self) {
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                self.add_term(exp_add(ea, eb), ca * cb);
            }
        }
    }

    pub fn scale_int(&self, k: &BigInt) -> Self {
        if k.is_zero() {
            return Self { terms: BTreeMap::new(), ..*self };
        }
        Self { terms: self.terms.iter().map(|(e, c)| (*e, c * k)).collect(), ..*self }
    }

    pub fn with_meta(mut self, scale_log2: u32, i_power: u8) -> Self {
        self.scale_log2 = scale_log2;
        self.i_power = i_power % 4;
        self
    }

    /// `sum_m c_m x^m`, without the scale and the power of `i`.
    pub fn eval_coefficients(&self, x: &[f64; NVARS]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let m: f64 = e.iter().zip(x).filter(|(k, _)| **k > 0).map(|(&k, xv)| xv.powi(k as i32)).product();
                c.to_f64().unwrap_or(f64::NAN) * m
            })
            .sum()
    }

    /// Full value including `i^i_power / 2^scale_log2`.
    pub fn eval(&self, x: &[f64; NVARS]) -> Complex64 {
        let v = self.eval_coefficients(x) / (self.scale_log2 as f64).exp2();
        let i = Complex64::new(0.0, 1.0);
        i.powu(self.i_power as u32) * v
    }

    /// Largest absolute coefficient (zero for the zero polynomial).
    pub fn max_abs_coefficient(&self) -> BigInt {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_default()
    }
}

pub fn exp_add(a: &Exponent, b: &Exponent) -> Exponent {
    std::array::from_fn(|v| a[v] + b[v])
}

/// `X1^a*X7^2` style rendering of a monomial (`1` for the constant).
pub fn format_monomial(e: &Exponent) -> String {
    let parts: Vec<String> = e
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(v, &k)| if k == 1 { format!("X{}", v + 1) } else { format!("X{}^{}", v + 1, k) })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

impl fmt::Display for IntPolynomial {
    /// `c * X1^a1*... + c * ...`, highest monomial first; metadata omitted.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (e, c)) in self.terms.iter().rev().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if n == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            write!(f, "{} * {}", c.abs(), format_monomial(e))?;
        }
        Ok(())
    }
}

/// Parse the textual format produced by `Display`.
pub fn parse_polynomial(s: &str) -> Option<IntPolynomial> {
    let s = s.trim();
    if s == "0" {
        return Some(IntPolynomial::zero());
    }
    let mut p = IntPolynomial::zero();
    let mut rest = s.to_string();
    let mut sign = BigInt::one();
    if let Some(r) = rest.strip_prefix('-') {
        sign = -sign;
        rest = r.to_string();
    }
    let mut chunks: Vec<(BigInt, String)> = Vec::new();
    let mut cur = String::new();
    let mut cur_sign = sign;
    let tokens: Vec<&str> = rest.split(' ').collect();
    let mut i = 0;
    while i < tokens.len() {
        let t = tokens[i];
        if (t == "+" || t == "-") && i + 1 < tokens.len() && !cur.is_empty() {
            chunks.push((cur_sign.clone(), std::mem::take(&mut cur)));
            cur_sign = if t == "-" { -BigInt::one() } else { BigInt::one() };
        } else {
            cur.push_str(t);
        }
        i += 1;
    }
    chunks.push((cur_sign, cur));
    for (sg, chunk) in chunks {
        let (c, m) = chunk.split_once('*')?;
        let c: BigInt = c.parse().ok()?;
        let mut e = [0u8; NVARS];
        if m != "1" {
            for f in m.split('*') {
                let (v, k) = match f.split_once('^') {
                    Some((v, k)) => (v, k.parse::<u8>().ok()?),
                    None => (f, 1),
                };
                let idx: usize = v.strip_prefix('X')?.parse().ok()?;
                if idx == 0 || idx > NVARS {
                    return None;
                }
                e[idx - 1] += k;
            }
        }
        p.add_term(e, sg * c);
    }
    Some(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(v: usize) -> IntPolynomial {
        IntPolynomial::var(v)
    }

    #[test]
    fn arithmetic_cancels_and_stays_canonical() {
        let p = x(0).add(&x(1));
        let q = x(0).sub(&x(1));
        let prod = p.mul(&q);
        let want = x(0).mul(&x(0)).sub(&x(1).mul(&x(1)));
        assert_eq!(prod, want);
        assert!(p.sub(&p).is_zero());
        assert_eq!(prod.degree(), Some(2));
        assert_eq!(IntPolynomial::zero().degree(), None);
    }

    #[test]
    fn scale_and_i_power_compose() {
        let half = IntPolynomial::one().with_meta(1, 1);
        let q = half.mul(&half);
        assert_eq!((q.scale_log2, q.i_power), (2, 2));
        let v = q.eval(&[0.0; NVARS]);
        assert!((v - Complex64::new(-0.25, 0.0)).norm() < 1e-15);
        // adding aligns the scale
        let s = IntPolynomial::one().with_meta(0, 2).add(&q);
        assert_eq!(s.scale_log2, 2);
        assert!((s.eval(&[0.0; NVARS]) - Complex64::new(-1.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn display_and_parse_round_trip() {
        let p = x(0).mul(&x(0)).scale_int(&BigInt::from(3)).sub(&x(6).mul(&x(17))).add(&IntPolynomial::constant(-7));
        let s = p.to_string();
        assert_eq!(parse_polynomial(&s).unwrap(), p);
        assert_eq!(IntPolynomial::zero().to_string(), "0");
        assert_eq!(parse_polynomial("0").unwrap(), IntPolynomial::zero());
        assert_eq!(IntPolynomial::constant(-2).to_string(), "-2 * 1");
    }

    #[test]
    fn big_coefficients_do_not_overflow() {
        let mut p = IntPolynomial::constant(i64::MAX);
        for _ in 0..4 {
            p = p.mul(&p);
        }
        assert!(p.max_abs_coefficient() > BigInt::from(i64::MAX) * BigInt::from(i64::MAX));
    }

    #[test]
    fn evaluation() {
        let p = x(0).mul(&x(0)).add(&x(2).scale_int(&BigInt::from(-2)));
        let mut pt = [0.0; NVARS];
        pt[0] = 3.0;
        pt[2] = 0.5;
        assert_eq!(p.eval_coefficients(&pt), 8.0);
    }
}
