//! Invariant classes of a cohomology action: Perron eigenpairs with
//! certified simple-dominance, exact Cesàro means with residuals, the
//! pushforward/pullback and pairing-invariance identity checks, and the
//! null-self-intersection (holomorphic-like) criterion.

use num::bigint::BigInt;
use num::{One, Signed, Zero};
use std::sync::Arc;

use crate::cohomology::{cup11, pair, BlowupSpace, Class11, Class22};
use crate::degrees::spectral_radius;
use crate::maps::CohAction;
use crate::ratmat::RatMat;
use crate::rational::{is_zero_vec, l1_norm, rat, rat_to_f64, Rat};
use crate::rootcert;
use crate::CoreError;

/// Width of certified eigenvalue enclosures.
const ENCLOSURE_DEN: i64 = 1_000_000_000_000;

/// Per-coefficient tolerance for the null-self-intersection flag.
pub const SELF_CUP_TOL: f64 = 1e-9;

/// Tolerance for the necessary pseudo-effectivity sign checks.
pub const PSEF_TOL: f64 = 1e-9;

/// How an invariant pair was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairMethod {
    /// The dominant eigenvalue is an exact rational; kernels are exact.
    ExactKernel,
    /// Irrational dominant eigenvalue: Newton-refined root plus one exact
    /// inverse-iteration solve, entries rounded to 120 dyadic bits.
    InverseIteration,
    /// Degenerate dominant spectrum: Cesàro projection of basis vectors.
    Cesaro,
}

/// Invariant eigenclasses: pullback eigenvector on H^{1,1} and pushforward
/// eigenvector on H^{2,2}, normalized so their pairing is exactly 1.
#[derive(Clone, Debug)]
pub struct InvariantPair {
    pub theta_plus: Class11,
    pub eta_minus: Class22,
    /// Certified enclosure of the dominant eigenvalue.
    pub lambda1: (Rat, Rat),
    /// True when pair(theta_plus, eta_minus) was rescaled to exactly 1.
    pub normalized: bool,
    pub method: PairMethod,
}

impl InvariantPair {
    pub fn lambda1_f64(&self) -> f64 {
        rat_to_f64(&((&self.lambda1.0 + &self.lambda1.1) / rat(2, 1)))
    }
}

/// Divides an exact vector by its first nonzero coordinate.
fn canonicalize_exact(v: &mut [Rat]) {
    let pivot = v
        .iter()
        .find(|c| !c.is_zero())
        .expect("nonzero vector")
        .clone();
    for c in v.iter_mut() {
        *c /= pivot.clone();
    }
}

/// Rounds to the nearest multiple of 2^-bits.
fn round_to_dyadic(x: &Rat, bits: u32) -> Rat {
    let scale = Rat::from_integer(BigInt::one() << bits);
    (x * &scale).round() / scale
}

/// Divides an approximate vector by its first significant coordinate, rounds
/// entries to 200 dyadic bits (about 60 decimal digits), and snaps
/// coordinates below 2^-180 (relative) to exact zero. The input approximates
/// an eigenvector to roughly 2^-200, so the output is deterministic across
/// reruns.
fn canonicalize_approx(v: &mut [Rat]) {
    let max_abs = v
        .iter()
        .map(Signed::abs)
        .max()
        .expect("nonempty vector");
    assert!(!max_abs.is_zero(), "inverse iteration returned zero");
    let thresh = &max_abs / Rat::from_integer(BigInt::one() << 60);
    let pivot = v
        .iter()
        .find(|c| c.abs() > thresh)
        .expect("some coordinate is significant")
        .clone();
    let snap = Rat::one() / Rat::from_integer(BigInt::one() << 180);
    for c in v.iter_mut() {
        *c /= pivot.clone();
        *c = round_to_dyadic(c, 200);
        if c.abs() < snap {
            *c = Rat::zero();
        }
    }
}

/// Dominant-eigenvalue certificate for a rational matrix: the largest real
/// root of the characteristic polynomial, certified simple and strictly
/// dominant in modulus. `Err(NonsimpleDominant)` otherwise.
fn certify_dominant_root(m: &RatMat) -> Result<(Vec<BigInt>, (Rat, Rat)), CoreError> {
    let ip = rootcert::clear_denominators(&m.char_poly());
    let width = rat(1, ENCLOSURE_DEN);
    let sf = rootcert::square_free_part(&ip);
    let (r_lo, r_hi) =
        rootcert::largest_real_root(&sf, &width).ok_or(CoreError::NonsimpleDominant)?;
    if !r_hi.is_positive() {
        return Err(CoreError::NonsimpleDominant);
    }
    let (m_lo, _) = rootcert::root_modulus_enclosure(&ip, &width);
    if r_hi < m_lo {
        // A complex pair (or negative eigenvalue) strictly dominates.
        return Err(CoreError::NonsimpleDominant);
    }
    if !rootcert::simple_in_interval(&ip, &r_lo, &r_hi) {
        return Err(CoreError::NonsimpleDominant);
    }
    // Exactly one distinct root outside a disk just below the root: no other
    // eigenvalue ties the modulus. Retry with perturbed radii when the test
    // circle happens to hit a root.
    let mut certified = false;
    for den in [1i64, 3, 7] {
        let c = &r_lo - rat(1, ENCLOSURE_DEN * den * 2);
        if !c.is_positive() {
            continue;
        }
        match rootcert::count_outside_disk(&sf, &c) {
            Some(1) => {
                certified = true;
                break;
            }
            Some(_) => return Err(CoreError::NonsimpleDominant),
            None => continue,
        }
    }
    if !certified {
        return Err(CoreError::NonsimpleDominant);
    }
    Ok((ip, (r_lo, r_hi)))
}

/// Eigenvector of `m` for the certified root: exact kernel when the root is
/// rational, otherwise Newton refinement plus one exact inverse-iteration
/// solve. Returns the canonicalized coordinate vector, the method used, and
/// the eigenvalue when it is an exact rational.
fn dominant_eigenvector(
    m: &RatMat,
    ip: &[BigInt],
    enclosure: &(Rat, Rat),
) -> Result<(Vec<Rat>, PairMethod, Option<Rat>), CoreError> {
    let (lo, hi) = enclosure;
    let cand = rootcert::simplest_in_interval(lo, hi);
    if rootcert::eval_rat(ip, &cand).is_zero() {
        let kernel = m.sub_scalar_diag(&cand).kernel();
        let mut v = kernel
            .into_iter()
            .next()
            .ok_or(CoreError::NonsimpleDominant)?;
        canonicalize_exact(&mut v);
        return Ok((v, PairMethod::ExactKernel, Some(cand)));
    }
    // Newton refinement of the simple root to ~2^-200.
    let dp = rootcert::derivative(ip);
    let mut x = (lo + hi) / rat(2, 1);
    for _ in 0..3 {
        let fx = rootcert::eval_rat(ip, &x);
        let dfx = rootcert::eval_rat(&dp, &x);
        if dfx.is_zero() {
            break;
        }
        x = round_to_dyadic(&(&x - fx / dfx), 200);
    }
    // One inverse-iteration step: exact solve against the all-ones vector.
    let shifted = m.sub_scalar_diag(&x);
    let ones = vec![Rat::one(); m.dim()];
    let mut v = match shifted.solve(&ones) {
        Some(v) => v,
        // x landed exactly on the eigenvalue: use the kernel directly.
        None => shifted
            .kernel()
            .into_iter()
            .next()
            .ok_or(CoreError::NonsimpleDominant)?,
    };
    canonicalize_approx(&mut v);
    Ok((v, PairMethod::InverseIteration, None))
}

/// Computes the invariant pair of an action: theta_plus from the H^{1,1}
/// pullback, eta_minus from the H^{2,2} pushforward (pairing adjoint), both
/// for the dominant eigenvalue, normalized so pair(theta_plus, eta_minus) is
/// exactly 1. Requires a certified simple, strictly dominant, positive real
/// eigenvalue; degenerate spectra are refused (use `perron_pair_cesaro`).
pub fn perron_pair(action: &CohAction) -> Result<InvariantPair, CoreError> {
    let (ip, enclosure) = certify_dominant_root(&action.m11)?;
    let (theta, method, exact) = dominant_eigenvector(&action.m11, &ip, &enclosure)?;
    let push22 = action.pushforward22_matrix();
    // Same characteristic polynomial: push22 = P M11^T P is conjugate to M11.
    let (eta_raw, _, _) = dominant_eigenvector(&push22, &ip, &enclosure)?;
    let lambda1 = match exact {
        Some(l) => (l.clone(), l),
        None => enclosure,
    };
    finish_pair(action, theta, eta_raw, lambda1, method)
}

/// Scales eta so the pairing is exactly 1 and assembles the result.
fn finish_pair(
    action: &CohAction,
    theta: Vec<Rat>,
    eta: Vec<Rat>,
    lambda1: (Rat, Rat),
    method: PairMethod,
) -> Result<InvariantPair, CoreError> {
    let space = &action.space;
    let theta_plus = space.class11(theta)?;
    let eta_class = space.class22(eta)?;
    let s = pair(&theta_plus, &eta_class)?;
    if s.is_zero() {
        return Err(CoreError::OrthogonalPair);
    }
    let eta_minus = eta_class.scale(&(Rat::one() / s));
    Ok(InvariantPair {
        theta_plus,
        eta_minus,
        lambda1,
        normalized: true,
        method,
    })
}

/// `perron_pair` with a Cesàro fallback for degenerate dominant spectra:
/// project basis vectors with N-term Cesàro means of M/lambda (lambda is the
/// certified modulus, snapped to an exact rational root when one lies in the
/// enclosure). On an involution with even N the projection is exact.
pub fn perron_pair_cesaro(action: &CohAction, n_terms: u32) -> Result<InvariantPair, CoreError> {
    match perron_pair(action) {
        Err(CoreError::NonsimpleDominant) => {}
        other => return other,
    }
    if n_terms == 0 {
        return Err(CoreError::Validation("n_terms must be positive".into()));
    }
    let ip = rootcert::clear_denominators(&action.m11.char_poly());
    let width = rat(1, ENCLOSURE_DEN);
    let (m_lo, m_hi) = rootcert::root_modulus_enclosure(&ip, &width);
    let cand = rootcert::simplest_in_interval(&m_lo, &m_hi);
    let exact = rootcert::eval_rat(&ip, &cand).is_zero();
    let lambda = if exact {
        cand
    } else {
        (&m_lo + &m_hi) / rat(2, 1)
    };
    if !lambda.is_positive() {
        return Err(CoreError::NonsimpleDominant);
    }
    let theta = cesaro_projection(&action.m11, &lambda, n_terms)?;
    let eta = cesaro_projection(&action.pushforward22_matrix(), &lambda, n_terms)?;
    let lambda1 = if exact {
        (lambda.clone(), lambda)
    } else {
        (m_lo, m_hi)
    };
    finish_pair(action, theta, eta, lambda1, PairMethod::Cesaro)
}

/// Cesàro mean of M/lambda applied to the first basis vector with a nonzero
/// projection, canonicalized.
fn cesaro_projection(m: &RatMat, lambda: &Rat, n_terms: u32) -> Result<Vec<Rat>, CoreError> {
    let dim = m.dim();
    for start in 0..dim {
        let mut v0 = vec![Rat::zero(); dim];
        v0[start] = Rat::one();
        let report = cesaro_means(m, &v0, lambda, n_terms)?;
        let mut t = report.means.last().expect("n_terms >= 1").clone();
        if !is_zero_vec(&t) {
            canonicalize_exact(&mut t);
            return Ok(t);
        }
    }
    Err(CoreError::Validation(
        "every basis vector has zero Cesàro projection".into(),
    ))
}

/// Exact Cesàro means T_N = (1/N) sum_{j=1..N} M^j v0 / lambda^j for
/// N = 1..=n_max, with residuals |M T_N - lambda T_N|_1 / |T_N|_1 and the
/// fitted constant C = max_N N * residual_N.
#[derive(Clone, Debug)]
pub struct CesaroReport {
    pub means: Vec<Vec<Rat>>,
    pub residuals: Vec<Rat>,
    pub fitted_c: f64,
}

pub fn cesaro_means(
    m: &RatMat,
    v0: &[Rat],
    lambda: &Rat,
    n_max: u32,
) -> Result<CesaroReport, CoreError> {
    if n_max < 1 {
        return Err(CoreError::Validation("n_max must be at least 1".into()));
    }
    if v0.len() != m.dim() {
        return Err(CoreError::Shape(format!(
            "v0 has length {} but the matrix is {1}x{1}",
            v0.len(),
            m.dim()
        )));
    }
    if !lambda.is_positive() {
        return Err(CoreError::Validation("lambda must be positive".into()));
    }
    if is_zero_vec(v0) {
        return Err(CoreError::Validation("v0 must be nonzero".into()));
    }
    let mut w = v0.to_vec();
    let mut sum = vec![Rat::zero(); v0.len()];
    let mut means = Vec::with_capacity(n_max as usize);
    let mut residuals = Vec::with_capacity(n_max as usize);
    let mut fitted_c = 0.0f64;
    for n in 1..=n_max {
        w = m.mul_vec(&w);
        for c in &mut w {
            *c /= lambda.clone();
        }
        for (s, c) in sum.iter_mut().zip(&w) {
            *s += c.clone();
        }
        let n_rat = Rat::from_integer(BigInt::from(n));
        let t: Vec<Rat> = sum.iter().map(|s| s / &n_rat).collect();
        let mt = m.mul_vec(&t);
        let diff: Vec<Rat> = mt
            .iter()
            .zip(&t)
            .map(|(a, b)| a - b * lambda)
            .collect();
        let denom = l1_norm(&t);
        let residual = if denom.is_zero() {
            Rat::zero()
        } else {
            l1_norm(&diff) / denom
        };
        fitted_c = fitted_c.max(f64::from(n) * rat_to_f64(&residual));
        means.push(t);
        residuals.push(residual);
    }
    Ok(CesaroReport {
        means,
        residuals,
        fitted_c,
    })
}

/// Outcome of the exact pushforward/pullback and pairing-invariance checks.
#[derive(Clone, Debug)]
pub struct PseudoIdentityReport {
    /// pushforward11 . M11 = Id exactly.
    pub pushforward_pullback_identity: bool,
    /// pair(M11 b_i, M22 c_j) = pair(b_i, c_j) for all basis pairs.
    pub pairing_invariant: bool,
    /// Violating pairs, by basis label; scan order is row-major in (i, j).
    pub violations: Vec<(String, String)>,
    pub pass: bool,
}

/// Verifies, in exact rational arithmetic, that the pushforward composed
/// with the pullback is the identity on H^{1,1} and that the pairing is
/// invariant on all basis pairs. Failures are reported, not raised.
pub fn check_pseudo_identities(action: &CohAction) -> PseudoIdentityReport {
    let dim = action.space.dim();
    let mut violations = Vec::new();

    let p = action.space.pairing_diag();
    let labels11 = action.space.basis11();
    let labels22 = action.space.basis22();
    let mut pairing_invariant = true;
    for i in 0..dim {
        for j in 0..dim {
            let lhs: Rat = (0..dim)
                .map(|k| &action.m11[(k, i)] * &p[k] * &action.m22[(k, j)])
                .sum();
            let rhs = if i == j { p[i].clone() } else { Rat::zero() };
            if lhs != rhs {
                pairing_invariant = false;
                violations.push((labels11[i].clone(), labels22[j].clone()));
            }
        }
    }

    let prod = action.pushforward11_matrix().mul(&action.m11);
    let mut pushforward_pullback_identity = true;
    'grid: for i in 0..dim {
        for j in 0..dim {
            let expect = if i == j { Rat::one() } else { Rat::zero() };
            if prod[(i, j)] != expect {
                pushforward_pullback_identity = false;
                violations.push(("pushforward_pullback".into(), format!("entry ({i},{j})")));
                break 'grid;
            }
        }
    }

    let pass = pushforward_pullback_identity && pairing_invariant;
    PseudoIdentityReport {
        pushforward_pullback_identity,
        pairing_invariant,
        violations,
        pass,
    }
}

/// Report of the null-self-intersection criterion and related sign data.
#[derive(Clone)]
pub struct HolomorphicLikeReport {
    /// cup11(theta, theta), exact.
    pub self_cup: Class22,
    /// Every coefficient of self_cup is within 1e-9 of zero.
    pub self_cup_is_zero: bool,
    /// pair(ample, self_cup), exact.
    pub ample_pairing: Rat,
    /// pair(M11 theta, e_i) over the exceptional curve classes, exact.
    pub exceptional_pairings: Vec<Rat>,
    /// Necessary pseudo-effectivity signs: pair(theta, h) and
    /// pair(theta, h - e_i) all >= -1e-9.
    pub psef_necessary: bool,
    /// l1(M11 theta - lambda theta) / l1(theta) with lambda the certified
    /// spectral radius midpoint.
    pub eigen_residual: f64,
    pub lambda_used: f64,
}

/// Checks the null-self-intersection condition for `theta`, reports its
/// pairing against a supplied ample class, the exceptional pairings of the
/// lifted class, the necessary psef sign conditions, and the eigenvector
/// residual of theta for the action's dominant eigenvalue.
pub fn holomorphic_like_check(
    action: &CohAction,
    theta: &Class11,
    ample: &Class11,
) -> Result<HolomorphicLikeReport, CoreError> {
    let self_cup = cup11(theta, theta)?;
    let self_cup_is_zero = self_cup.is_zero_within(SELF_CUP_TOL);
    let ample_pairing = pair(ample, &self_cup)?;

    let lifted = action.apply11(theta)?;
    let exceptional_pairings = action
        .exceptional_curves
        .iter()
        .map(|c| pair(&lifted, c))
        .collect::<Result<Vec<_>, _>>()?;

    let space = &theta.space;
    let mut psef_necessary = rat_to_f64(&pair(theta, &space.line())?) >= -PSEF_TOL;
    for i in 1..=space.n_points() {
        let curve = space.line().add(&space.basis22_class(i).neg())?;
        psef_necessary &= rat_to_f64(&pair(theta, &curve)?) >= -PSEF_TOL;
    }

    let sr = spectral_radius(&action.m11);
    let lambda = Rat::from_float(sr.value).unwrap_or_else(Rat::one);
    let scaled = theta.scale(&lambda);
    let m_theta = action.apply11(theta)?;
    let diff: Vec<Rat> = m_theta
        .coeffs
        .iter()
        .zip(&scaled.coeffs)
        .map(|(a, b)| a - b)
        .collect();
    let denom = l1_norm(&theta.coeffs);
    let eigen_residual = if denom.is_zero() {
        0.0
    } else {
        rat_to_f64(&(l1_norm(&diff) / denom))
    };

    Ok(HolomorphicLikeReport {
        self_cup,
        self_cup_is_zero,
        ample_pairing,
        exceptional_pairings,
        psef_necessary,
        eigen_residual,
        lambda_used: sr.value,
    })
}

/// The exact solution set of cup11(theta, theta) = 0 on a blowup space: in
/// coordinates the equation reads (a^2, -b_1^2, ..., -b_N^2) = 0, so each
/// coefficient must vanish individually and the only solution — over the
/// rationals and over the reals alike — is the zero class. Returned exactly;
/// the checker flags it as a (degenerate) exact solution.
pub fn null_self_intersection_class(space: &Arc<BlowupSpace>) -> Class11 {
    space
        .class11(vec![Rat::zero(); space.dim()])
        .expect("length matches the basis")
}
