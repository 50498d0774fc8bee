//! The linear symbol `A0(xi)`, its eigenbases and spectral projectors, the
//! constraint symbol `L0(xi)`, and their action on grid fields.
//!
//! Only `tau0`, `b0`, `d0` of the background enter here; the frame velocity
//! `v0` is a pure advection and is left to the caller (see
//! [`crate::model::galilean_shift`]).

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{AbiError, Result};
use crate::grid::{SpectralField, StateField};
use crate::model::{alpha_beta_delta, norm0, ConstantState};
use crate::{Mat10, Mat3, Vec3, NCOMP};

pub type Vec10 = SVector<f64, NCOMP>;
pub type Mat5x10 = SMatrix<f64, 5, NCOMP>;

/// Sign conventions shared by every propagator in the crate.
pub mod convention {
    /// `A0(xi)` is the real symmetric matrix with `d/dt U = A0(grad) U` for
    /// the linear part, so with `grad <-> i k` a Fourier mode evolves as
    /// `d/dt U_k = EVOLUTION_SIGN * i * A0(k) U_k`.
    pub const EVOLUTION_SIGN: f64 = 1.0;

    /// Phase of an `E(+)` mode after time `t`: `exp(PLUS_PHASE_SIGN * i t |k|_0)`.
    pub const PLUS_PHASE_SIGN: f64 = EVOLUTION_SIGN;
}

/// Cross-product matrix: `r(x) f = x ^ f`.
pub fn cross_matrix(x: &Vec3) -> Mat3 {
    Mat3::new(0.0, -x[2], x[1], x[2], 0.0, -x[0], -x[1], x[0], 0.0)
}

/// Eigen-branch of `A0(xi)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Branch {
    pub const ALL: [Branch; 3] = [Branch::Zero, Branch::Plus, Branch::Minus];

    /// `+1`, `0` or `-1`.
    pub fn sign(self) -> f64 {
        match self {
            Branch::Zero => 0.0,
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Branch::Zero => '0',
            Branch::Plus => '+',
            Branch::Minus => '-',
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = AbiError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "0" | "zero" => Ok(Branch::Zero),
            "+" | "plus" => Ok(Branch::Plus),
            "-" | "minus" => Ok(Branch::Minus),
            _ => Err(AbiError::Config(format!("unknown branch {s:?}"))),
        }
    }
}

/// What a [`SpectralMatrix`] represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixRole {
    A0,
    P0,
    Pplus,
    Pminus,
}

impl From<Branch> for MatrixRole {
    fn from(b: Branch) -> Self {
        match b {
            Branch::Zero => MatrixRole::P0,
            Branch::Plus => MatrixRole::Pplus,
            Branch::Minus => MatrixRole::Pminus,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralMatrix {
    pub role: MatrixRole,
    pub xi: Vec3,
    pub state: ConstantState,
    pub m: Mat10,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintMatrix {
    pub xi: Vec3,
    pub state: ConstantState,
    pub m: Mat5x10,
}

/// Direct orthonormal frame `(e1, e2, e3)` with `e1 = xi/|xi|`, together
/// with `alpha`, `beta`, `delta` of `xi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyFrame {
    pub xi: Vec3,
    pub e1: Vec3,
    pub e2: Vec3,
    pub e3: Vec3,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
}

impl FrequencyFrame {
    pub fn new(xi: &Vec3, state: &ConstantState) -> Result<Self> {
        let n = xi.norm();
        if n == 0.0 {
            return Err(AbiError::Domain("frequency frame undefined at xi = 0".into()));
        }
        let (alpha, beta, delta) = alpha_beta_delta(xi, state)?;
        let e1 = xi / n;
        let rho2 = xi[0] * xi[0] + xi[1] * xi[1];
        let e2 = if rho2 > 1e-30 * n * n {
            Vec3::new(xi[1], -xi[0], 0.0) / rho2.sqrt()
        } else {
            // xi along the third axis
            Vec3::new(1.0, 0.0, 0.0)
        };
        let e3 = e1.cross(&e2);
        Ok(Self { xi: *xi, e1, e2, e3, alpha, beta, delta })
    }

    /// Same frequency with `(e2, e3)` rotated by `theta` about `e1`.
    pub fn rotated(&self, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self { e2: self.e2 * c + self.e3 * s, e3: self.e3 * c - self.e2 * s, ..*self }
    }
}

/// The linear symbol; `A0(0) = 0`.
pub fn assemble_a0(xi: &Vec3, state: &ConstantState) -> SpectralMatrix {
    let (t0, b0, d0) = (state.tau0, state.b0(), state.d0());
    let (bx, dx) = (b0.dot(xi), d0.dot(xi));
    let r = cross_matrix(xi);
    let mut m = Mat10::zeros();
    for a in 0..3 {
        m[(0, 1 + a)] = t0 * xi[a];
        m[(1 + a, 0)] = t0 * xi[a];
        m[(1 + a, 4 + a)] = bx;
        m[(4 + a, 1 + a)] = bx;
        m[(1 + a, 7 + a)] = dx;
        m[(7 + a, 1 + a)] = dx;
        for c in 0..3 {
            m[(4 + a, 7 + c)] = -t0 * r[(a, c)];
            m[(7 + a, 4 + c)] = t0 * r[(a, c)];
        }
    }
    SpectralMatrix { role: MatrixRole::A0, xi: *xi, state: *state, m }
}

/// Eigenvectors of `A0(xi)`: four for `0`, three each for `+|xi|_0` and
/// `-|xi|_0`, written in the given frame.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenBasis {
    pub frame: FrequencyFrame,
    pub e0: [Vec10; 4],
    pub eplus: [Vec10; 3],
    pub eminus: [Vec10; 3],
}

impl EigenBasis {
    pub fn vectors(&self, branch: Branch) -> &[Vec10] {
        match branch {
            Branch::Zero => &self.e0,
            Branch::Plus => &self.eplus,
            Branch::Minus => &self.eminus,
        }
    }
}

fn stack(t: f64, v: Vec3, b: Vec3, d: Vec3) -> Vec10 {
    Vec10::from_column_slice(&[t, v[0], v[1], v[2], b[0], b[1], b[2], d[0], d[1], d[2]])
}

pub fn eigen_basis(xi: &Vec3, state: &ConstantState) -> Result<EigenBasis> {
    Ok(eigen_basis_in_frame(&FrequencyFrame::new(xi, state)?))
}

pub fn eigen_basis_in_frame(f: &FrequencyFrame) -> EigenBasis {
    let (a, b, d) = (f.alpha, f.beta, f.delta);
    let (e1, e2, e3) = (f.e1, f.e2, f.e3);
    let z = Vec3::zeros();
    let e0 = [
        stack(-b, z, e1 * a, z),
        stack(-d, z, z, e1 * a),
        stack(0.0, e2 * a, e3 * d, -e3 * b),
        stack(0.0, e3 * a, -e2 * d, e2 * b),
    ];
    let eplus = [
        stack(a, e1, e1 * b, e1 * d),
        stack(0.0, e2 * d - e3 * (b * a), e2 * (b * d) - e3 * a, e2 * (1.0 - b * b)),
        stack(0.0, e2 * (b * a) + e3 * d, e2 * a + e3 * (b * d), e3 * (1.0 - b * b)),
    ];
    let eminus = [
        stack(-a, e1, -e1 * b, -e1 * d),
        stack(0.0, -e2 * d - e3 * (b * a), e2 * (b * d) + e3 * a, e2 * (1.0 - b * b)),
        stack(0.0, e2 * (b * a) - e3 * d, -e2 * a + e3 * (b * d), e3 * (1.0 - b * b)),
    ];
    EigenBasis { frame: *f, e0, eplus, eminus }
}

/// Orthogonal projector onto the span of `vectors`: `M (M^T M)^{-1} M^T`.
pub fn span_projector(vectors: &[Vec10]) -> Option<Mat10> {
    let m = nalgebra::DMatrix::from_iterator(NCOMP, vectors.len(), vectors.iter().flat_map(|v| v.iter().copied()));
    let gram = m.transpose() * &m;
    let inv = gram.try_inverse()?;
    let p = &m * inv * m.transpose();
    Some(Mat10::from_iterator(p.iter().copied()))
}

fn put(m: &mut Mat10, r0: usize, c0: usize, block: &Mat3) {
    for i in 0..3 {
        for j in 0..3 {
            m[(r0 + i, c0 + j)] = block[(i, j)];
        }
    }
}

fn put_row(m: &mut Mat10, c0: usize, v: &Vec3) {
    for j in 0..3 {
        m[(0, c0 + j)] = v[j];
    }
}

fn put_col(m: &mut Mat10, r0: usize, v: &Vec3) {
    for i in 0..3 {
        m[(r0 + i, 0)] = v[i];
    }
}

/// Closed-form projector onto a branch; rejects `xi = 0`.
pub fn projector(xi: &Vec3, state: &ConstantState, branch: Branch) -> Result<SpectralMatrix> {
    let n = xi.norm();
    if n == 0.0 {
        return Err(AbiError::Domain("projectors are undefined at xi = 0".into()));
    }
    let (a, b, d) = alpha_beta_delta(xi, state)?;
    let m = projector_matrix(&(xi / n), a, b, d, branch);
    Ok(SpectralMatrix { role: branch.into(), xi: *xi, state: *state, m })
}

/// Projector from the unit direction `e` and `(alpha, beta, delta)`.
pub fn projector_matrix(e: &Vec3, a: f64, b: f64, d: f64, branch: Branch) -> Mat10 {
    let i3 = Mat3::identity();
    let ee = e * e.transpose();
    let r = cross_matrix(e);
    let mut m = Mat10::zeros();
    match branch {
        Branch::Zero => {
            m[(0, 0)] = 1.0 - a * a;
            put_row(&mut m, 4, &(e * (-a * b)));
            put_row(&mut m, 7, &(e * (-a * d)));
            put(&mut m, 1, 1, &((i3 - ee) * (a * a)));
            put(&mut m, 1, 4, &(r * (-a * d)));
            put(&mut m, 1, 7, &(r * (a * b)));
            put_col(&mut m, 4, &(e * (-a * b)));
            put(&mut m, 4, 1, &(r * (a * d)));
            put(&mut m, 4, 4, &(i3 * (d * d) + ee * (a * a)));
            put(&mut m, 4, 7, &(i3 * (-b * d)));
            put_col(&mut m, 7, &(e * (-a * d)));
            put(&mut m, 7, 1, &(r * (-a * b)));
            put(&mut m, 7, 4, &(i3 * (-b * d)));
            put(&mut m, 7, 7, &(i3 * (b * b) + ee * (a * a)));
        }
        Branch::Plus | Branch::Minus => {
            let s = branch.sign();
            m[(0, 0)] = a * a;
            put_row(&mut m, 1, &(e * (s * a)));
            put_row(&mut m, 4, &(e * (a * b)));
            put_row(&mut m, 7, &(e * (a * d)));
            put_col(&mut m, 1, &(e * (s * a)));
            put(&mut m, 1, 1, &(i3 * (1.0 - a * a) + ee * (a * a)));
            put(&mut m, 1, 4, &(i3 * (s * b) + r * (a * d)));
            put(&mut m, 1, 7, &(i3 * (s * d) - r * (a * b)));
            put_col(&mut m, 4, &(e * (a * b)));
            put(&mut m, 4, 1, &(i3 * (s * b) - r * (a * d)));
            put(&mut m, 4, 4, &(i3 * (1.0 - d * d) - ee * (a * a)));
            put(&mut m, 4, 7, &(i3 * (b * d) - r * (s * a)));
            put_col(&mut m, 7, &(e * (a * d)));
            put(&mut m, 7, 1, &(i3 * (s * d) + r * (a * b)));
            put(&mut m, 7, 4, &(i3 * (b * d) + r * (s * a)));
            put(&mut m, 7, 7, &(i3 * (1.0 - b * b) - ee * (a * a)));
            m *= 0.5;
        }
    }
    m
}

/// All three projectors at once, `[P0, P+, P-]`.
pub fn projectors(xi: &Vec3, state: &ConstantState) -> Result<[Mat10; 3]> {
    let n = xi.norm();
    if n == 0.0 {
        return Err(AbiError::Domain("projectors are undefined at xi = 0".into()));
    }
    let (a, b, d) = alpha_beta_delta(xi, state)?;
    let e = xi / n;
    Ok(Branch::ALL.map(|br| projector_matrix(&e, a, b, d, br)))
}

/// Constraint symbol: two divergence rows and the three rotational rows.
pub fn assemble_l0(xi: &Vec3, state: &ConstantState) -> ConstraintMatrix {
    let (t0, b0, d0) = (state.tau0, state.b0(), state.d0());
    let (bx, dx) = (b0.dot(xi), d0.dot(xi));
    let r = cross_matrix(xi);
    let mut m = Mat5x10::zeros();
    m[(0, 0)] = bx;
    m[(1, 0)] = dx;
    for a in 0..3 {
        m[(0, 4 + a)] = -t0 * xi[a];
        m[(1, 7 + a)] = -t0 * xi[a];
        m[(2 + a, 4 + a)] = dx;
        m[(2 + a, 7 + a)] = -bx;
        for c in 0..3 {
            m[(2 + a, 1 + c)] = t0 * r[(a, c)];
        }
    }
    ConstraintMatrix { xi: *xi, state: *state, m }
}

fn apply_real(m: &Mat10, z: &[Complex64; NCOMP]) -> [Complex64; NCOMP] {
    std::array::from_fn(|i| (0..NCOMP).map(|j| z[j] * m[(i, j)]).sum())
}

/// Branch parts of a field; `u+` and `u-` are complex conjugate partners
/// (`P+(-k) = P-(k)`), `u0` is Hermitian and so real in physical space.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub plus: SpectralField,
    pub minus: SpectralField,
    pub zero: SpectralField,
}

impl Decomposition {
    pub fn part(&self, branch: Branch) -> &SpectralField {
        match branch {
            Branch::Zero => &self.zero,
            Branch::Plus => &self.plus,
            Branch::Minus => &self.minus,
        }
    }

    pub fn sum(&self) -> SpectralField {
        self.plus.add(&self.minus).add(&self.zero)
    }
}

/// Pointwise projection in Fourier space. The wave vector of each mode is
/// the one used for differentiation, so the mean mode and any mode whose
/// differentiated frequency vanishes go wholly to `u0`.
pub fn decompose(field: &StateField, state: &ConstantState) -> Result<Decomposition> {
    decompose_spectral(&field.to_spectral(), state)
}

pub fn decompose_spectral(hat: &SpectralField, state: &ConstantState) -> Result<Decomposition> {
    state.validate()?;
    let grid = hat.grid;
    let part = |branch: Branch| {
        hat.map_modes(|idx, z| {
            let k = grid.derivative_wavevector(idx);
            if k.norm() == 0.0 {
                return if branch == Branch::Zero { *z } else { [Complex64::default(); NCOMP] };
            }
            let (a, b, d) = alpha_beta_delta(&k, state).expect("non-zero frequency");
            apply_real(&projector_matrix(&(k / k.norm()), a, b, d, branch), z)
        })
    };
    Ok(Decomposition { plus: part(Branch::Plus), minus: part(Branch::Minus), zero: part(Branch::Zero) })
}

/// Direction of the free linear flow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `U(0) -> U(t)`.
    Forward,
    /// `U(t) -> f(t)`, undoing the linear flow.
    Profile,
}

/// Exact per-mode exponential `P0 + e^{i th} P+ + e^{-i th} P-` with
/// `th = +-t |k|_0`, applied to a spectral field.
pub fn propagate_spectral(
    hat: &SpectralField,
    state: &ConstantState,
    t: f64,
    direction: Direction,
) -> Result<SpectralField> {
    state.validate()?;
    let grid = hat.grid;
    let sign = convention::PLUS_PHASE_SIGN * if direction == Direction::Forward { 1.0 } else { -1.0 };
    Ok(hat.map_modes(|idx, z| {
        let k = grid.derivative_wavevector(idx);
        let kn = k.norm();
        if kn == 0.0 || t == 0.0 {
            return *z;
        }
        let (a, b, d) = alpha_beta_delta(&k, state).expect("non-zero frequency");
        let e = k / kn;
        let ph = Complex64::from_polar(1.0, sign * t * norm0(&k, state));
        let p0 = apply_real(&projector_matrix(&e, a, b, d, Branch::Zero), z);
        let pp = apply_real(&projector_matrix(&e, a, b, d, Branch::Plus), z);
        let pm = apply_real(&projector_matrix(&e, a, b, d, Branch::Minus), z);
        std::array::from_fn(|c| p0[c] + ph * pp[c] + ph.conj() * pm[c])
    }))
}

pub fn propagate_linear(field: &StateField, state: &ConstantState, t: f64, direction: Direction) -> Result<StateField> {
    Ok(propagate_spectral(&field.to_spectral(), state, t, direction)?.to_physical())
}

/// Numerical rank from singular values above `tol * max`.
pub fn numerical_rank(m: &nalgebra::DMatrix<f64>, tol: f64) -> usize {
    let sv = m.singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > tol * smax).count()
}
