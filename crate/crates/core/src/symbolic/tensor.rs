//! Projected bilinear interaction tensors as integer polynomials.
//!
//! A quadratic term `u_i d_j u_k` has Fourier symbol
//! `i |xi - eta| (xi - eta)_j / |xi - eta|` with `u_k` taken at `xi - eta`
//! and `u_i` at `eta`. Dividing by `|xi - eta|` leaves the order-zero symbol
//! `X_{7+j}` (times one global factor of `i`), stored at entry
//! `[out][k][i]`.

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AbiError, Result};
use crate::grid::{B, D, TAU, V};
use crate::resonance::InteractionSpec;
use crate::spectral::Branch;
use crate::NCOMP;

use super::layout::{FrequencyVars, LAYOUT};
use super::poly::{IntPolynomial, NVARS};

/// Which bilinear form the tensor projects.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TensorKind {
    /// Evolution nonlinearity, 10 outputs, projected by `P^{eps1}` on output.
    N,
    /// Constraint nonlinearity, 5 outputs, no output projector.
    Nprime,
}

impl TensorKind {
    pub fn rows(self) -> usize {
        match self {
            TensorKind::N => NCOMP,
            TensorKind::Nprime => 5,
        }
    }
}

impl std::fmt::Display for TensorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TensorKind::N => "N",
            TensorKind::Nprime => "Nprime",
        })
    }
}

impl std::str::FromStr for TensorKind {
    type Err = AbiError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "N" | "n" => Ok(TensorKind::N),
            "Nprime" | "nprime" | "N'" => Ok(TensorKind::Nprime),
            _ => Err(AbiError::Config(format!("unknown tensor kind {s:?}"))),
        }
    }
}

/// Coefficient `c` of `u_undiff d_dir u_diff` in output `out`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadraticTerm {
    pub out: usize,
    pub undiff: usize,
    pub diff: usize,
    pub dir: usize,
    pub coeff: i64,
}

fn term(out: usize, undiff: usize, diff: usize, dir: usize, coeff: i64) -> QuadraticTerm {
    QuadraticTerm { out, undiff, diff, dir, coeff }
}

/// `(curl f)_m = d_{m+1} f_{m+2} - d_{m+2} f_{m+1}` (indices mod 3) as
/// `(dir, component, sign)` pairs.
fn curl_parts(m: usize) -> [(usize, usize, i64); 2] {
    let (a, b) = ((m + 1) % 3, (m + 2) % 3);
    [(a, b, 1), (b, a, -1)]
}

/// Quadratic part of the evolution right-hand side:
///
/// ```text
/// tau: -v.grad tau + tau div v
/// v:   -v.grad v + b.grad b + d.grad d + tau grad tau
/// b:   -v.grad b + b.grad v - tau curl d
/// d:   -v.grad d + d.grad v + tau curl b
/// ```
pub fn n_terms() -> Vec<QuadraticTerm> {
    let mut t = Vec::new();
    for j in 0..3 {
        t.push(term(TAU, V[j], TAU, j, -1));
        t.push(term(TAU, TAU, V[j], j, 1));
    }
    for m in 0..3 {
        for j in 0..3 {
            t.push(term(V[m], V[j], V[m], j, -1));
            t.push(term(V[m], B[j], B[m], j, 1));
            t.push(term(V[m], D[j], D[m], j, 1));
            t.push(term(B[m], V[j], B[m], j, -1));
            t.push(term(B[m], B[j], V[m], j, 1));
            t.push(term(D[m], V[j], D[m], j, -1));
            t.push(term(D[m], D[j], V[m], j, 1));
        }
        t.push(term(V[m], TAU, TAU, m, 1));
        for (dir, comp, sign) in curl_parts(m) {
            t.push(term(B[m], TAU, D[comp], dir, -sign));
            t.push(term(D[m], TAU, B[comp], dir, sign));
        }
    }
    t
}

/// Quadratic right-hand side of the constraints:
///
/// ```text
/// -tau div b + b.grad tau
/// -tau div d + d.grad tau
/// -tau curl v + b.grad d - d.grad b
/// ```
pub fn nprime_terms() -> Vec<QuadraticTerm> {
    let mut t = Vec::new();
    for j in 0..3 {
        t.push(term(0, TAU, B[j], j, -1));
        t.push(term(0, B[j], TAU, j, 1));
        t.push(term(1, TAU, D[j], j, -1));
        t.push(term(1, D[j], TAU, j, 1));
    }
    for m in 0..3 {
        for j in 0..3 {
            t.push(term(2 + m, B[j], D[m], j, 1));
            t.push(term(2 + m, D[j], B[m], j, -1));
        }
        for (dir, comp, sign) in curl_parts(m) {
            t.push(term(2 + m, TAU, V[comp], dir, -sign));
        }
    }
    t
}

fn lin(parts: &[(i64, &[usize])]) -> IntPolynomial {
    let mut p = IntPolynomial::zero();
    for (c, vars) in parts {
        let mut e = [0u8; NVARS];
        for v in *vars {
            e[*v] += 1;
        }
        p.add_term(e, BigInt::from(*c));
    }
    p
}

/// `2 P^{sign}` of one frequency as a row-major 10 x 10 array of
/// polynomials in its direction `e` and `(a, b, d) = (alpha, beta, delta)`.
pub fn projector_polynomials(f: &FrequencyVars, branch: Branch) -> Result<Vec<IntPolynomial>> {
    let s: i64 = match branch {
        Branch::Plus => 1,
        Branch::Minus => -1,
        Branch::Zero => return Err(AbiError::Unsupported("only the wave projectors are polynomial-scaled".into())),
    };
    let e = f.dir;
    let (a, b, d) = (f.abd[0], f.abd[1], f.abd[2]);
    // r(e)_{ij} as (sign, variable) or None
    let r = |i: usize, j: usize| -> Option<(i64, usize)> {
        match (i, j) {
            (0, 1) => Some((-1, e[2])),
            (0, 2) => Some((1, e[1])),
            (1, 0) => Some((1, e[2])),
            (1, 2) => Some((-1, e[0])),
            (2, 0) => Some((-1, e[1])),
            (2, 1) => Some((1, e[0])),
            _ => None,
        }
    };
    let delta = |i: usize, j: usize| i == j;
    let mut m = vec![IntPolynomial::zero(); NCOMP * NCOMP];
    let mut set = |row: usize, col: usize, p: IntPolynomial| m[row * NCOMP + col] = p;
    set(TAU, TAU, lin(&[(1, &[a, a])]));
    for j in 0..3 {
        set(TAU, V[j], lin(&[(s, &[a, e[j]])]));
        set(TAU, B[j], lin(&[(1, &[a, b, e[j]])]));
        set(TAU, D[j], lin(&[(1, &[a, d, e[j]])]));
        set(V[j], TAU, lin(&[(s, &[a, e[j]])]));
        set(B[j], TAU, lin(&[(1, &[a, b, e[j]])]));
        set(D[j], TAU, lin(&[(1, &[a, d, e[j]])]));
    }
    for i in 0..3 {
        for j in 0..3 {
            let mut vv: Vec<(i64, Vec<usize>)> = vec![(1, vec![a, a, e[i], e[j]])];
            let mut bb: Vec<(i64, Vec<usize>)> = vec![(-1, vec![a, a, e[i], e[j]])];
            let mut dd = bb.clone();
            let mut vb: Vec<(i64, Vec<usize>)> = Vec::new();
            let mut vd = Vec::new();
            let mut bv = Vec::new();
            let mut dv = Vec::new();
            let mut bd = Vec::new();
            let mut db = Vec::new();
            if delta(i, j) {
                vv.extend([(1, vec![]), (-1, vec![a, a])]);
                bb.extend([(1, vec![]), (-1, vec![d, d])]);
                dd.extend([(1, vec![]), (-1, vec![b, b])]);
                vb.push((s, vec![b]));
                bv.push((s, vec![b]));
                vd.push((s, vec![d]));
                dv.push((s, vec![d]));
                bd.push((1, vec![b, d]));
                db.push((1, vec![b, d]));
            }
            if let Some((rs, rv)) = r(i, j) {
                vb.push((rs, vec![a, d, rv]));
                vd.push((-rs, vec![a, b, rv]));
                bv.push((-rs, vec![a, d, rv]));
                dv.push((rs, vec![a, b, rv]));
                bd.push((-s * rs, vec![a, rv]));
                db.push((s * rs, vec![a, rv]));
            }
            let conv = |v: &Vec<(i64, Vec<usize>)>| {
                let parts: Vec<(i64, &[usize])> = v.iter().map(|(c, vars)| (*c, vars.as_slice())).collect();
                lin(&parts)
            };
            set(V[i], V[j], conv(&vv));
            set(V[i], B[j], conv(&vb));
            set(V[i], D[j], conv(&vd));
            set(B[i], V[j], conv(&bv));
            set(B[i], B[j], conv(&bb));
            set(B[i], D[j], conv(&bd));
            set(D[i], V[j], conv(&dv));
            set(D[i], B[j], conv(&db));
            set(D[i], D[j], conv(&dd));
        }
    }
    Ok(m)
}

/// Entries `[out][k][i]` over the index sets `outs` and `slots`.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionTensor {
    pub spec: InteractionSpec,
    pub kind: TensorKind,
    pub outs: Vec<usize>,
    pub slots: Vec<usize>,
    pub entries: Vec<IntPolynomial>,
    pub scale_log2: u32,
    pub i_power: u8,
}

impl InteractionTensor {
    pub fn index(&self, o: usize, k: usize, i: usize) -> usize {
        let ns = self.slots.len();
        (o * ns + k) * ns + i
    }

    /// Entry at positions within `outs` and `slots`.
    pub fn entry(&self, o: usize, k: usize, i: usize) -> &IntPolynomial {
        &self.entries[self.index(o, k, i)]
    }

    pub fn entry_mut(&mut self, o: usize, k: usize, i: usize) -> &mut IntPolynomial {
        let idx = self.index(o, k, i);
        &mut self.entries[idx]
    }

    /// Component labels `[out, k, i]` of a flat entry index.
    pub fn labels(&self, idx: usize) -> [usize; 3] {
        let ns = self.slots.len();
        [self.outs[idx / (ns * ns)], self.slots[(idx / ns) % ns], self.slots[idx % ns]]
    }

    /// Sub-tensor on the given output rows and slot components.
    pub fn restrict(&self, outs: &[usize], slots: &[usize]) -> Result<InteractionTensor> {
        let pos = |set: &[usize], c: usize| {
            set.iter().position(|&x| x == c).ok_or_else(|| AbiError::Config(format!("component {c} not in tensor")))
        };
        let mut entries = Vec::with_capacity(outs.len() * slots.len() * slots.len());
        for &o in outs {
            let po = pos(&self.outs, o)?;
            for &k in slots {
                let pk = pos(&self.slots, k)?;
                for &i in slots {
                    let pi = pos(&self.slots, i)?;
                    entries.push(self.entry(po, pk, pi).clone());
                }
            }
        }
        Ok(InteractionTensor { outs: outs.to_vec(), slots: slots.to_vec(), entries, ..self.clone_meta() })
    }

    fn clone_meta(&self) -> InteractionTensor {
        InteractionTensor {
            spec: self.spec,
            kind: self.kind,
            outs: Vec::new(),
            slots: Vec::new(),
            entries: Vec::new(),
            scale_log2: self.scale_log2,
            i_power: self.i_power,
        }
    }

    /// Real order-zero symbol at a point (the global factor `i` omitted).
    pub fn eval_real(&self, x: &[f64; NVARS]) -> Vec<f64> {
        let scale = (self.scale_log2 as f64).exp2();
        self.entries.iter().map(|p| p.eval_coefficients(x) / scale).collect()
    }

    pub fn max_degree(&self) -> u32 {
        self.entries.iter().filter_map(|p| p.degree()).max().unwrap_or(0)
    }

    pub fn terms_max(&self) -> usize {
        self.entries.iter().map(|p| p.len()).max().unwrap_or(0)
    }
}

/// Index sets of the `(tau, v)` Chaplygin sub-block.
pub const CHAPLYGIN_COMPONENTS: [usize; 4] = [TAU, V[0], V[1], V[2]];

/// `P^{eps1}(xi) B (P^{eps2}(xi - eta) (x) P^{eps3}(eta)) / |xi - eta|`
/// (`N`) or `B' (P^{eps2} (x) P^{eps3}) / |xi - eta|` (`Nprime`), scaled by
/// `2^scale_log2` to integer coefficients.
pub fn build_interaction_tensor(spec: &InteractionSpec, kind: TensorKind) -> Result<InteractionTensor> {
    if spec.eps2 == Branch::Zero || spec.eps3 == Branch::Zero || (kind == TensorKind::N && spec.eps1 == Branch::Zero) {
        return Err(AbiError::Unsupported(format!("tensor needs wave signs, got {spec}")));
    }
    let p2 = projector_polynomials(&LAYOUT.diff, spec.eps2)?;
    let p3 = projector_polynomials(&LAYOUT.eta, spec.eps3)?;
    let (terms, rows) = match kind {
        TensorKind::N => (n_terms(), NCOMP),
        TensorKind::Nprime => (nprime_terms(), 5),
    };
    let dir_var: Vec<IntPolynomial> = LAYOUT.diff.dir.iter().map(|&v| IntPolynomial::var(v)).collect();

    // inner[o'][k][i] = sum_terms c X_{7+j} P2[k'][k] P3[i'][i]
    let inner: Vec<IntPolynomial> = (0..rows * NCOMP * NCOMP)
        .into_par_iter()
        .map(|idx| {
            let (o, k, i) = (idx / (NCOMP * NCOMP), (idx / NCOMP) % NCOMP, idx % NCOMP);
            let mut acc = IntPolynomial::zero();
            for t in terms.iter().filter(|t| t.out == o) {
                let a = &p2[t.diff * NCOMP + k];
                let b = &p3[t.undiff * NCOMP + i];
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                let lhs = dir_var[t.dir].scale_int(&BigInt::from(t.coeff)).mul(a);
                acc.add_product(&lhs, b);
            }
            acc
        })
        .collect();

    let (entries, scale_log2) = match kind {
        TensorKind::Nprime => (inner, 2),
        TensorKind::N => {
            let p1 = projector_polynomials(&LAYOUT.xi, spec.eps1)?;
            let outer: Vec<IntPolynomial> = (0..NCOMP * NCOMP * NCOMP)
                .into_par_iter()
                .map(|idx| {
                    let (o, rest) = (idx / (NCOMP * NCOMP), idx % (NCOMP * NCOMP));
                    let mut acc = IntPolynomial::zero();
                    for op in 0..NCOMP {
                        let a = &p1[o * NCOMP + op];
                        let b = &inner[op * NCOMP * NCOMP + rest];
                        if !a.is_zero() && !b.is_zero() {
                            acc.add_product(a, b);
                        }
                    }
                    acc
                })
                .collect();
            (outer, 3)
        }
    };
    let entries = entries.into_iter().map(|p| p.with_meta(scale_log2, 1)).collect();
    Ok(InteractionTensor {
        spec: *spec,
        kind,
        outs: (0..rows).collect(),
        slots: (0..NCOMP).collect(),
        entries,
        scale_log2,
        i_power: 1,
    })
}
