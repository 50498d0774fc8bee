//! Phase functions of quadratic interactions, their resonant sets, the
//! identities linking `phi`, `grad_xi phi` and `grad_eta phi`, and the
//! angular cutoffs that split each interaction into a part away from the
//! time-resonant set and a part near it.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AbiError, Result};
use crate::model::{metric_matrix, ConstantState, Metric0};
use crate::spectral::Branch;
use crate::Vec3;

/// Points with `min(|xi|, |eta|, |xi - eta|) < AXIS_EXCLUSION * max(..)` are
/// treated as on-axis.
pub const AXIS_EXCLUSION: f64 = 1e-6;

/// Relative denominator below which the `L^inf` identities are skipped.
pub const LINF_SKIP_THRESHOLD: f64 = 1e-3;

/// Sign triple `(eps1, eps2 eps3)` of an interaction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InteractionSpec {
    pub eps1: Branch,
    pub eps2: Branch,
    pub eps3: Branch,
}

impl InteractionSpec {
    pub fn new(eps1: Branch, eps2: Branch, eps3: Branch) -> Self {
        Self { eps1, eps2, eps3 }
    }

    /// The eight triples with every sign in `{+, -}`, `+` first.
    pub fn all_wave() -> [InteractionSpec; 8] {
        let pm = [Branch::Plus, Branch::Minus];
        std::array::from_fn(|i| Self::new(pm[i >> 2], pm[(i >> 1) & 1], pm[i & 1]))
    }

    pub fn is_wave(&self) -> bool {
        [self.eps1, self.eps2, self.eps3].iter().all(|b| *b != Branch::Zero)
    }

    /// `eps2 * eps3`.
    pub fn s(&self) -> f64 {
        self.eps2.sign() * self.eps3.sign()
    }
}

impl std::fmt::Display for InteractionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{}{}", self.eps1.symbol(), self.eps2.symbol(), self.eps3.symbol())
    }
}

impl std::str::FromStr for InteractionSpec {
    type Err = AbiError;

    /// Accepts `"+,-+"` or `"+-+"`.
    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace() && *c != ',').collect();
        if chars.len() != 3 {
            return Err(AbiError::Config(format!("interaction must have three signs, got {s:?}")));
        }
        let p = |c: char| c.to_string().parse::<Branch>();
        Ok(Self::new(p(chars[0])?, p(chars[1])?, p(chars[2])?))
    }
}

fn check_off_axis(xi: &Vec3, eta: &Vec3) -> Result<()> {
    let ns = [xi.norm(), eta.norm(), (xi - eta).norm()];
    let max = ns.iter().copied().fold(0.0, f64::max);
    let min = ns.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min >= AXIS_EXCLUSION * max) || max == 0.0 {
        return Err(AbiError::Domain("on-axis point: xi, eta or xi - eta (nearly) vanishes".into()));
    }
    Ok(())
}

/// `eps1 |xi|_0 - eps2 |xi - eta|_0 - eps3 |eta|_0`.
pub fn phase(spec: &InteractionSpec, xi: &Vec3, eta: &Vec3, m: &Metric0) -> f64 {
    spec.eps1.sign() * m.norm(xi) - spec.eps2.sign() * m.norm(&(xi - eta)) - spec.eps3.sign() * m.norm(eta)
}

fn unit0(v: &Vec3, m: &Metric0, what: &str) -> Result<Vec3> {
    let n = m.norm(v);
    if n == 0.0 {
        return Err(AbiError::Domain(format!("gradient undefined: {what} vanishes")));
    }
    Ok(m.apply(v) / n)
}

/// `eps2 g0 (xi - eta)/|xi - eta|_0 - eps3 g0 eta/|eta|_0`.
pub fn grad_eta_phase(spec: &InteractionSpec, xi: &Vec3, eta: &Vec3, m: &Metric0) -> Result<Vec3> {
    let mut g = Vec3::zeros();
    if spec.eps2 != Branch::Zero {
        g += unit0(&(xi - eta), m, "xi - eta")? * spec.eps2.sign();
    }
    if spec.eps3 != Branch::Zero {
        g -= unit0(eta, m, "eta")? * spec.eps3.sign();
    }
    Ok(g)
}

/// `eps1 g0 xi/|xi|_0 - eps2 g0 (xi - eta)/|xi - eta|_0`.
pub fn grad_xi_phase(spec: &InteractionSpec, xi: &Vec3, eta: &Vec3, m: &Metric0) -> Result<Vec3> {
    let mut g = Vec3::zeros();
    if spec.eps1 != Branch::Zero {
        g += unit0(xi, m, "xi")? * spec.eps1.sign();
    }
    if spec.eps2 != Branch::Zero {
        g -= unit0(&(xi - eta), m, "xi - eta")? * spec.eps2.sign();
    }
    Ok(g)
}

/// Phase data at one `(xi, eta)` with tolerance-based set membership.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResonanceSample {
    pub xi: [f64; 3],
    pub eta: [f64; 3],
    pub phi: f64,
    pub grad_xi: [f64; 3],
    pub grad_eta: [f64; 3],
    pub in_s: bool,
    pub in_t: bool,
}

impl ResonanceSample {
    pub fn new(spec: &InteractionSpec, xi: &Vec3, eta: &Vec3, state: &ConstantState, tol: f64) -> Result<Self> {
        let m = metric_matrix(state)?;
        let phi = phase(spec, xi, eta, &m);
        let gx = grad_xi_phase(spec, xi, eta, &m)?;
        let ge = grad_eta_phase(spec, xi, eta, &m)?;
        let scale = m.norm(xi) + m.norm(eta) + m.norm(&(xi - eta));
        Ok(Self {
            xi: (*xi).into(),
            eta: (*eta).into(),
            phi,
            grad_xi: gx.into(),
            grad_eta: ge.into(),
            in_s: m.dual_norm(&ge) <= tol,
            in_t: phi.abs() <= tol * scale,
        })
    }
}

fn sum0(xi: &Vec3, eta: &Vec3, m: &Metric0) -> f64 {
    m.norm(xi) + m.norm(eta) + m.norm(&(xi - eta))
}

/// `|| eps1 |xi|_0 grad_xi phi + eps3 |eta|_0 grad_eta phi + eps2 g0 (xi-eta)/|xi-eta|_0 phi ||`
/// divided by `|xi|_0 + |eta|_0 + |xi - eta|_0`.
pub fn check_identity_fond(spec: &InteractionSpec, xi: &Vec3, eta: &Vec3, state: &ConstantState) -> Result<f64> {
    if !spec.is_wave() {
        return Err(AbiError::Domain(format!("identity needs signs in {{+,-}}, got {spec}")));
    }
    check_off_axis(xi, eta)?;
    let m = metric_matrix(state)?;
    let phi = phase(spec, xi, eta, &m);
    let lhs = grad_xi_phase(spec, xi, eta, &m)? * (spec.eps1.sign() * m.norm(xi));
    let rhs = -grad_eta_phase(spec, xi, eta, &m)? * (spec.eps3.sign() * m.norm(eta))
        - unit0(&(xi - eta), &m, "xi - eta")? * (spec.eps2.sign() * phi);
    Ok((lhs - rhs).norm() / sum0(xi, eta, &m))
}

/// Result of an `L^inf` identity check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum LinfCheck {
    Residual(f64),
    /// The identity's denominator is below the skip threshold.
    Skipped {
        relative_denominator: f64,
    },
}

impl LinfCheck {
    pub fn residual(&self) -> Option<f64> {
        match self {
            LinfCheck::Residual(r) => Some(*r),
            LinfCheck::Skipped { .. } => None,
        }
    }
}

/// The identities expressing `phi` through `|grad_eta phi|_0'^2`, defined for
/// the six triples other than `+,--` and `-,++`. The residual is relative to
/// `|xi|_0 + |eta|_0 + |xi - eta|_0`.
pub fn check_identity_linf(spec: &InteractionSpec, xi: &Vec3, eta: &Vec3, state: &ConstantState) -> Result<LinfCheck> {
    if !spec.is_wave() {
        return Err(AbiError::Domain(format!("identity needs signs in {{+,-}}, got {spec}")));
    }
    check_off_axis(xi, eta)?;
    let m = metric_matrix(state)?;
    let z = xi - eta;
    let (nx, nz, ne) = (m.norm(xi), m.norm(&z), m.norm(eta));
    let s = nx + nz + ne;
    let phi = phase(spec, xi, eta, &m);
    let g2 = m.dual_norm(&grad_eta_phase(spec, xi, eta, &m)?).powi(2);
    let (e1, e2, e3) = (spec.eps1.sign(), spec.eps2.sign(), spec.eps3.sign());
    // (multiplier of phi, numerator, denominator, natural size of the denominator)
    let (k, num, den, den_scale) = if e2 == e3 && e1 == e2 {
        (1.0, -e1 * nz * ne, s, s)
    } else if e2 == e1 && e3 != e1 {
        (2.0, e1 * s * nz * ne, nx * nz + m.inner(xi, &z), nx * nz)
    } else if e3 == e1 && e2 != e1 {
        (2.0, e1 * s * nz * ne, nx * ne + m.inner(xi, eta), nx * ne)
    } else {
        return Err(AbiError::Domain(format!("no L^inf identity for {spec}")));
    };
    if den.abs() < LINF_SKIP_THRESHOLD * den_scale {
        return Ok(LinfCheck::Skipped { relative_denominator: den / den_scale });
    }
    Ok(LinfCheck::Residual((k * phi - num / den * g2).abs() / s))
}

/// `|xi|_0 grad_xi phi = -(|xi|_0 - |xi - eta|_0) grad_eta phi + sign g0 eta`
/// for the `+,+0` (`sign = +`) and `-,-0` (`sign = -`) interactions.
pub fn check_identity_fond0(sign: Branch, xi: &Vec3, eta: &Vec3, state: &ConstantState) -> Result<f64> {
    if sign == Branch::Zero {
        return Err(AbiError::Domain("sign must be + or -".into()));
    }
    check_off_axis(xi, eta)?;
    let m = metric_matrix(state)?;
    let spec = InteractionSpec::new(sign, sign, Branch::Zero);
    let lhs = grad_xi_phase(&spec, xi, eta, &m)? * m.norm(xi);
    let rhs = -grad_eta_phase(&spec, xi, eta, &m)? * (m.norm(xi) - m.norm(&(xi - eta))) + m.apply(eta) * sign.sign();
    Ok((lhs - rhs).norm() / sum0(xi, eta, &m))
}

fn bump(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// Smooth transition: 0 for `x <= -1/4`, 1 for `x >= 1/4`.
pub fn chi_tilde(x: f64) -> f64 {
    let s = (x + 0.25) / 0.5;
    let (a, b) = (bump(s), bump(1.0 - s));
    a / (a + b)
}

/// `xi/|xi|_0 . g0 (xi - eta)/|xi - eta|_0`, in `[-1, 1]`.
pub fn cutoff_argument(xi: &Vec3, eta: &Vec3, m: &Metric0) -> f64 {
    let z = xi - eta;
    m.inner(xi, &z) / (m.norm(xi) * m.norm(&z))
}

/// The angular repartition `chi = chi_+` of a wave interaction.
pub fn cutoff_chi(spec: &InteractionSpec, xi: &Vec3, eta: &Vec3, state: &ConstantState) -> Result<f64> {
    if !spec.is_wave() {
        return Err(AbiError::Domain(format!("cutoff needs signs in {{+,-}}, got {spec}")));
    }
    check_off_axis(xi, eta)?;
    let m = metric_matrix(state)?;
    let x = cutoff_argument(xi, eta, &m);
    let (e1, e2, e3) = (spec.eps1, spec.eps2, spec.eps3);
    Ok(if e2 == e3 && e1 != e2 {
        1.0
    } else if e2 == e3 {
        0.0
    } else if e1 == e3 {
        chi_tilde(x)
    } else {
        chi_tilde(-x)
    })
}

/// Uniform point with each coordinate of `xi` and `eta` in `[-1, 1]`,
/// rejecting on-axis draws.
pub fn random_off_axis_point<R: Rng + ?Sized>(rng: &mut R) -> (Vec3, Vec3) {
    loop {
        let mut v = || Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let (xi, eta) = (v(), v());
        if check_off_axis(&xi, &eta).is_ok() {
            return (xi, eta);
        }
    }
}

/// Background with `tau0` in `[0.2, 2]` and `|b0|, |d0| <= 2`.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R) -> ConstantState {
    let mut ball = |r: f64| loop {
        let v = Vec3::new(rng.random_range(-r..r), rng.random_range(-r..r), rng.random_range(-r..r));
        if v.norm() <= r {
            return v;
        }
    };
    let b0 = ball(2.0);
    let d0 = ball(2.0);
    ConstantState { tau0: rng.random_range(0.2..2.0), v0: [0.0; 3], b0: b0.into(), d0: d0.into() }
}

/// Range of `lambda` for which `eta = lambda xi` is time-resonant, or `None`
/// when the time-resonant set is only the origin.
pub fn resonant_lambda_range(spec: &InteractionSpec) -> Option<(f64, f64)> {
    let (e1, e2, e3) = (spec.eps1, spec.eps2, spec.eps3);
    if e2 == e3 && e1 != e2 {
        None
    } else if e2 == e3 {
        Some((0.0, 1.0))
    } else if e1 == e3 {
        Some((1.0, f64::INFINITY))
    } else {
        Some((f64::NEG_INFINITY, 0.0))
    }
}

/// Summary of [`resonant_set_probe`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeStats {
    pub interaction: String,
    /// Samples on the displayed parametrisation of the time-resonant set.
    pub on_set_samples: usize,
    /// `max |phi| / (|xi|_0 + |eta|_0 + |xi - eta|_0)` over those samples.
    pub on_set_max_relative_phase: f64,
    /// Random samples with `chi_+ > 0`.
    pub support_samples: usize,
    /// `min |phi| (|xi|_0 + |eta|_0 + |xi - eta|_0) / (c |xi|_0 |xi - eta|_0)`
    /// over the support, with `c = 3/2` for mixed-sign interactions; for
    /// `+,--` and `-,++` the ratio is `|phi| / (|xi|_0 + |eta|_0 + |xi - eta|_0)`.
    /// Values `>= 1` confirm the lower bound.
    pub support_min_ratio: f64,
    /// `min (|xi|_0 |xi - eta|_0 + xi . g0 (xi - eta)) / (|xi|_0 |xi - eta|_0)`
    /// over the support of `chi_+` for `+,-+` / `-,+-`, expected `>= 3/4`.
    pub support_min_angle_margin: Option<f64>,
    /// Number of `chi_+ > 0` samples for an interaction whose cutoff must vanish.
    pub support_violations: usize,
}

/// Sample the time-resonant set along `eta = lambda xi` and random points
/// on the support of `chi_+`.
pub fn resonant_set_probe<R: Rng + ?Sized>(
    spec: &InteractionSpec,
    n_samples: usize,
    state: &ConstantState,
    rng: &mut R,
) -> Result<ProbeStats> {
    if !spec.is_wave() {
        return Err(AbiError::Domain(format!("probe needs signs in {{+,-}}, got {spec}")));
    }
    let m = metric_matrix(state)?;
    let mut on_max: f64 = 0.0;
    let mut on_n = 0;
    if let Some((lo, hi)) = resonant_lambda_range(spec) {
        let (lo, hi) = (lo.max(-4.0), hi.min(4.0));
        for _ in 0..n_samples {
            let (xi, _) = random_off_axis_point(rng);
            let lam = rng.random_range(lo..=hi);
            let eta = xi * lam;
            on_max = on_max.max(phase(spec, &xi, &eta, &m).abs() / sum0(&xi, &eta, &m));
            on_n += 1;
        }
    }
    let mixed = spec.eps2 != spec.eps3;
    let mut sup_n = 0;
    let mut min_ratio = f64::INFINITY;
    let mut min_margin = f64::INFINITY;
    let mut violations = 0;
    for _ in 0..n_samples {
        let (xi, eta) = random_off_axis_point(rng);
        let chi = cutoff_chi(spec, &xi, &eta, state)?;
        if chi <= 0.0 {
            continue;
        }
        sup_n += 1;
        let phi = phase(spec, &xi, &eta, &m).abs();
        let s = sum0(&xi, &eta, &m);
        let z = xi - eta;
        let (nx, nz) = (m.norm(&xi), m.norm(&z));
        if mixed {
            min_ratio = min_ratio.min(phi * s / (1.5 * nx * nz));
            if spec.eps1 == spec.eps3 {
                min_margin = min_margin.min((nx * nz + m.inner(&xi, &z)) / (nx * nz));
            }
        } else if spec.eps1 != spec.eps2 {
            min_ratio = min_ratio.min(phi / s);
        } else {
            violations += 1;
        }
    }
    Ok(ProbeStats {
        interaction: spec.to_string(),
        on_set_samples: on_n,
        on_set_max_relative_phase: on_max,
        support_samples: sup_n,
        support_min_ratio: min_ratio,
        support_min_angle_margin: (mixed && spec.eps1 == spec.eps3).then_some(min_margin),
        support_violations: violations,
    })
}

/// Maximum residual of one identity over a sample run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityStat {
    pub identity: String,
    pub interaction: String,
    pub evaluated: usize,
    pub skipped: usize,
    pub max_residual: f64,
}

/// Every identity evaluated at the same random off-axis points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub samples: usize,
    pub seed: u64,
    /// `None` when a fresh random background is drawn per point.
    pub state: Option<ConstantState>,
    pub stats: Vec<IdentityStat>,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.stats.iter().map(|s| s.max_residual).fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.stats.iter().all(|s| s.evaluated > 0 && s.max_residual <= tol)
    }
}

/// Run the 8 `fond`, 6 `L^inf` and 2 `fond0` identities at `samples` points
/// drawn from a ChaCha8 stream keyed by `seed`.
pub fn identity_suite(samples: usize, seed: u64, state: Option<ConstantState>) -> Result<IdentityReport> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let wave = InteractionSpec::all_wave();
    let linf: Vec<InteractionSpec> = wave.iter().copied().filter(|s| !(s.eps2 == s.eps3 && s.eps1 != s.eps2)).collect();
    let stat = |identity: &str, interaction: String| IdentityStat {
        identity: identity.into(),
        interaction,
        evaluated: 0,
        skipped: 0,
        max_residual: 0.0,
    };
    let mut stats: Vec<IdentityStat> = wave.iter().map(|s| stat("fond", s.to_string())).collect();
    stats.extend(linf.iter().map(|s| stat("linf", s.to_string())));
    stats.extend(["+,+0", "-,-0"].map(|s| stat("fond0", s.into())));
    let record = |st: &mut IdentityStat, r: f64| {
        st.evaluated += 1;
        // NaN must not be swallowed by max.
        st.max_residual = if r.is_nan() { f64::NAN } else { st.max_residual.max(r) };
    };
    for _ in 0..samples {
        let s = match state {
            Some(s) => s,
            None => random_state(&mut rng),
        };
        let (xi, eta) = random_off_axis_point(&mut rng);
        for (i, spec) in wave.iter().enumerate() {
            record(&mut stats[i], check_identity_fond(spec, &xi, &eta, &s)?);
        }
        for (i, spec) in linf.iter().enumerate() {
            match check_identity_linf(spec, &xi, &eta, &s)? {
                LinfCheck::Residual(r) => record(&mut stats[8 + i], r),
                LinfCheck::Skipped { .. } => stats[8 + i].skipped += 1,
            }
        }
        for (i, sign) in [Branch::Plus, Branch::Minus].into_iter().enumerate() {
            record(&mut stats[14 + i], check_identity_fond0(sign, &xi, &eta, &s)?);
        }
    }
    Ok(IdentityReport { samples, seed, state, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(s: &str) -> InteractionSpec {
        s.parse().unwrap()
    }

    fn fd_grad(f: impl Fn(&Vec3) -> f64, x: &Vec3, h: f64) -> Vec3 {
        Vec3::from_fn(|i, _| {
            let mut e = Vec3::zeros();
            e[i] = h;
            (f(&(x + e)) - f(&(x - e))) / (2.0 * h)
        })
    }

    #[test]
    fn identity_suite_covers_sixteen_identities_and_is_reproducible() {
        let r = identity_suite(300, 7, None).unwrap();
        assert_eq!(r.stats.len(), 16);
        assert!(r.passes(1e-10), "{}", r.max_residual());
        assert!(!r.passes(1e-30));
        assert_eq!(r, identity_suite(300, 7, None).unwrap());
        let iso = identity_suite(100, 1, Some(ConstantState::isotropic(1.0))).unwrap();
        assert!(iso.passes(1e-10));
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in InteractionSpec::all_wave() {
            assert_eq!(s.to_string().parse::<InteractionSpec>().unwrap(), s);
        }
        assert_eq!(spec("+-+"), spec("+,-+"));
        assert_eq!(spec("+,+0").eps3, Branch::Zero);
        assert!("++".parse::<InteractionSpec>().is_err());
    }

    #[test]
    fn phase_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let st = random_state(&mut rng);
        let m = st.metric().unwrap();
        let xi = Vec3::new(0.4, -0.3, 1.1);
        assert!(phase(&spec("+,++"), &xi, &(xi * 0.3), &m).abs() < 1e-14);
        assert!(phase(&spec("+,-+"), &xi, &(xi * 2.0), &m).abs() < 1e-14);
        assert!(phase(&spec("+,+-"), &xi, &(-xi), &m).abs() < 1e-14);
        let eta = Vec3::new(-0.2, 0.5, 0.1);
        let p = phase(&spec("+,--"), &xi, &eta, &m);
        assert!((p - sum0(&xi, &eta, &m)).abs() < 1e-14 && p > 0.0);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for sp in InteractionSpec::all_wave().into_iter().chain([spec("+,+0"), spec("-,0+")]) {
            for _ in 0..50 {
                let st = random_state(&mut rng);
                let m = st.metric().unwrap();
                let (xi, eta) = random_off_axis_point(&mut rng);
                if (xi - eta).norm() < 0.05 || eta.norm() < 0.05 || xi.norm() < 0.05 {
                    continue;
                }
                let ge = grad_eta_phase(&sp, &xi, &eta, &m).unwrap();
                let fe = fd_grad(|e| phase(&sp, &xi, e, &m), &eta, 1e-5);
                assert!((ge - fe).norm() <= 1e-6 * ge.norm().max(1.0), "{sp}");
                let gx = grad_xi_phase(&sp, &xi, &eta, &m).unwrap();
                let fx = fd_grad(|x| phase(&sp, x, &eta, &m), &xi, 1e-5);
                assert!((gx - fx).norm() <= 1e-6 * gx.norm().max(1.0), "{sp}");
            }
        }
    }

    #[test]
    fn on_axis_gradient_is_rejected() {
        let m = ConstantState::default().metric().unwrap();
        let xi = Vec3::new(1.0, 0.0, 0.0);
        assert!(grad_eta_phase(&spec("+,++"), &xi, &Vec3::zeros(), &m).is_err());
        assert!(grad_eta_phase(&spec("+,++"), &xi, &xi, &m).is_err());
        assert!(check_identity_fond(&spec("+,++"), &xi, &xi, &ConstantState::default()).is_err());
        assert!(cutoff_chi(&spec("+,-+"), &Vec3::zeros(), &xi, &ConstantState::default()).is_err());
    }

    #[test]
    fn identity_fond_holds_for_all_wave_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for sp in InteractionSpec::all_wave() {
            for _ in 0..500 {
                let st = random_state(&mut rng);
                let (xi, eta) = random_off_axis_point(&mut rng);
                assert!(check_identity_fond(&sp, &xi, &eta, &st).unwrap() <= 1e-10);
            }
        }
        // isotropic reduction, g0 = tau0^2 I
        let st = ConstantState::isotropic(0.7);
        let (xi, eta) = (Vec3::new(0.3, 0.1, -0.4), Vec3::new(-0.5, 0.2, 0.2));
        assert!(check_identity_fond(&spec("-,+-"), &xi, &eta, &st).unwrap() <= 1e-12);
    }

    #[test]
    fn identity_fond_at_collinear_resonant_point() {
        let st = ConstantState { b0: [0.5, 0.0, 0.2], ..ConstantState::isotropic(1.0) };
        let m = st.metric().unwrap();
        let xi = Vec3::new(0.2, 0.7, -0.1);
        let eta = xi * 0.4;
        let sp = spec("+,++");
        assert!(phase(&sp, &xi, &eta, &m).abs() < 1e-15);
        assert!(grad_eta_phase(&sp, &xi, &eta, &m).unwrap().norm() < 1e-14);
        assert!(check_identity_fond(&sp, &xi, &eta, &st).unwrap() < 1e-14);
    }

    #[test]
    fn identity_linf_holds_and_mirrors() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let six = ["+,++", "+,+-", "+,-+", "-,+-", "-,-+", "-,--"];
        let mut checked = 0;
        for sp in six {
            for _ in 0..500 {
                let st = random_state(&mut rng);
                let (xi, eta) = random_off_axis_point(&mut rng);
                if let LinfCheck::Residual(r) = check_identity_linf(&spec(sp), &xi, &eta, &st).unwrap() {
                    assert!(r <= 1e-10, "{sp}: {r}");
                    checked += 1;
                }
            }
        }
        assert!(checked > 2500);
        assert!(check_identity_linf(&spec("+,--"), &Vec3::x(), &Vec3::y(), &ConstantState::default()).is_err());
        // the -,-- identity is the +,++ one with a global sign
        let st = ConstantState::isotropic(1.3);
        let (xi, eta) = (Vec3::new(0.3, 0.1, -0.4), Vec3::new(-0.5, 0.2, 0.2));
        let a = check_identity_linf(&spec("+,++"), &xi, &eta, &st).unwrap().residual().unwrap();
        let b = check_identity_linf(&spec("-,--"), &xi, &eta, &st).unwrap().residual().unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn identity_linf_skips_vanishing_denominator() {
        // for +,+- the denominator vanishes when xi - eta is anti-parallel to xi
        let st = ConstantState::isotropic(1.0);
        let xi = Vec3::new(1.0, 0.0, 0.0);
        let eta = Vec3::new(2.0, 1e-5, 0.0);
        assert!(matches!(check_identity_linf(&spec("+,+-"), &xi, &eta, &st).unwrap(), LinfCheck::Skipped { .. }));
    }

    #[test]
    fn identity_fond0_holds_and_literal_sign_does_not() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut literal_worst: f64 = 0.0;
        for sign in [Branch::Plus, Branch::Minus] {
            for _ in 0..500 {
                let st = random_state(&mut rng);
                let (xi, eta) = random_off_axis_point(&mut rng);
                assert!(check_identity_fond0(sign, &xi, &eta, &st).unwrap() <= 1e-10);
                let m = st.metric().unwrap();
                let sp = InteractionSpec::new(sign, sign, Branch::Zero);
                let lhs = grad_xi_phase(&sp, &xi, &eta, &m).unwrap() * m.norm(&xi);
                let lit = grad_eta_phase(&sp, &xi, &eta, &m).unwrap() * (m.norm(&xi) - m.norm(&(xi - eta)))
                    + m.apply(&eta) * sign.sign();
                literal_worst = literal_worst.max((lhs - lit).norm() / sum0(&xi, &eta, &m));
            }
        }
        assert!(literal_worst > 1e-2);
    }

    #[test]
    fn identity_fond0_small_eta_limit() {
        let st = ConstantState { d0: [0.0, 0.3, 0.0], ..ConstantState::isotropic(1.0) };
        let m = st.metric().unwrap();
        let xi = Vec3::new(0.3, -0.8, 0.5);
        let eta = Vec3::new(1e-5, 2e-5, -1e-5);
        let sp = InteractionSpec::new(Branch::Plus, Branch::Plus, Branch::Zero);
        let lhs = grad_xi_phase(&sp, &xi, &eta, &m).unwrap() * m.norm(&xi);
        assert!(lhs.norm() < 1e-4);
        assert!(check_identity_fond0(Branch::Plus, &xi, &eta, &st).unwrap() < 1e-12);
    }

    #[test]
    fn chi_tilde_plateaus_and_monotone() {
        assert_eq!(chi_tilde(-0.25), 0.0);
        assert_eq!(chi_tilde(-1.0), 0.0);
        assert_eq!(chi_tilde(0.25), 1.0);
        assert_eq!(chi_tilde(0.9), 1.0);
        assert!((chi_tilde(0.0) - 0.5).abs() < 1e-15);
        let mut prev = 0.0;
        for i in 0..=200 {
            let x = -0.3 + 0.6 * i as f64 / 200.0;
            let c = chi_tilde(x);
            assert!((0.0..=1.0).contains(&c) && c >= prev);
            prev = c;
        }
    }

    #[test]
    fn cutoff_constant_cases_and_supports() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..2000 {
            let st = random_state(&mut rng);
            let m = st.metric().unwrap();
            let (xi, eta) = random_off_axis_point(&mut rng);
            assert_eq!(cutoff_chi(&spec("+,--"), &xi, &eta, &st).unwrap(), 1.0);
            assert_eq!(cutoff_chi(&spec("-,++"), &xi, &eta, &st).unwrap(), 1.0);
            assert_eq!(cutoff_chi(&spec("+,++"), &xi, &eta, &st).unwrap(), 0.0);
            assert_eq!(cutoff_chi(&spec("-,--"), &xi, &eta, &st).unwrap(), 0.0);
            let z = xi - eta;
            let bound = 0.25 * m.norm(&xi) * m.norm(&z) * (1.0 + 1e-12);
            if cutoff_chi(&spec("+,-+"), &xi, &eta, &st).unwrap() > 0.0 {
                assert!(m.inner(&xi, &z) >= -bound);
            }
            if cutoff_chi(&spec("+,+-"), &xi, &eta, &st).unwrap() > 0.0 {
                assert!(m.inner(&xi, &z) <= bound);
            }
            assert_eq!(
                cutoff_chi(&spec("+,-+"), &xi, &eta, &st).unwrap(),
                cutoff_chi(&spec("-,+-"), &xi, &eta, &st).unwrap()
            );
        }
    }

    #[test]
    fn probe_confirms_sets_and_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let st = random_state(&mut rng);
        for sp in InteractionSpec::all_wave() {
            let p = resonant_set_probe(&sp, 2000, &st, &mut rng).unwrap();
            assert!(p.on_set_max_relative_phase <= 1e-10, "{sp}");
            assert_eq!(p.support_violations, 0);
            if p.support_samples > 0 {
                assert!(p.support_min_ratio >= 1.0 - 1e-12, "{sp}: {}", p.support_min_ratio);
            }
            if let Some(mm) = p.support_min_angle_margin {
                assert!(mm >= 0.75 - 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn phase_is_homogeneous_and_exchange_symmetric(
            x in prop::array::uniform3(-1.0f64..1.0),
            e in prop::array::uniform3(-1.0f64..1.0),
            lam in 0.01f64..50.0,
            tau0 in 0.2f64..2.0,
            b in prop::array::uniform3(-1.0f64..1.0),
            idx in 0usize..8,
        ) {
            let st = ConstantState { tau0, v0: [0.0; 3], b0: b, d0: [0.2, -0.1, 0.4] };
            let m = st.metric().unwrap();
            let (xi, eta) = (Vec3::from(x), Vec3::from(e));
            let sp = InteractionSpec::all_wave()[idx];
            let p = phase(&sp, &xi, &eta, &m);
            let scale = sum0(&xi, &eta, &m) * lam + 1e-300;
            prop_assert!((phase(&sp, &(xi * lam), &(eta * lam), &m) - lam * p).abs() <= 1e-12 * scale);
            let swapped = InteractionSpec::new(sp.eps1, sp.eps3, sp.eps2);
            prop_assert!((phase(&swapped, &xi, &(xi - eta), &m) - p).abs() <= 1e-12 * scale);
        }

        #[test]
        fn space_resonant_points_align(
            e in prop::array::uniform3(-1.0f64..1.0),
            x in prop::array::uniform3(-1.0f64..1.0),
            lam in 0.05f64..5.0,
            idx in 0usize..8,
        ) {
            let sp = InteractionSpec::all_wave()[idx];
            let eta = Vec3::from(e);
            prop_assume!(eta.norm() > 1e-3);
            let st = ConstantState { tau0: 0.9, v0: [0.0; 3], b0: x, d0: [0.3, 0.0, -0.2] };
            let m = st.metric().unwrap();
            // xi - eta = s lambda eta
            let xi = eta + eta * (sp.s() * lam);
            prop_assume!(xi.norm() > 1e-6);
            let g = grad_eta_phase(&sp, &xi, &eta, &m).unwrap();
            prop_assert!(m.dual_norm(&g) < 1e-12);
            let u = (xi - eta) / (xi - eta).norm();
            prop_assert!((u - eta / eta.norm() * sp.s()).norm() < 1e-12);
            let sample = ResonanceSample::new(&sp, &xi, &eta, &st, 1e-9).unwrap();
            prop_assert!(sample.in_s);
        }
    }
}
