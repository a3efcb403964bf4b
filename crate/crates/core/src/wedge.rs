//! Monte Carlo pairing experiments in an affine chart: currents dd^c(u_eps)
//! wedged against pushed-forward (2,2)-forms, change-of-variables cross
//! checks, positivity scans, and weighted-sample measure pushforward.
//!
//! Conventions: dd^c = (i/pi) d dbar, so a hyperplane log pole carries unit
//! mass; with Lebesgue measure on R^6 the pairing density is
//! (8/pi) · beta · MixedDet(Hessian(u_eps), A, B) for form factors A, B.

use num::complex::Complex64;
use num::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::maps::{cremona_catalog_entry, RationalMap};
use crate::poly::{Poly, N_VARS};
use crate::sampling::pairwise_sum;
use crate::CoreError;

/// Central-difference step for chart Hessians.
pub const FD_STEP: f64 = 1e-4;

/// Density normalization (8/pi): product of the volume factor of the three
/// i dz ∧ dzbar pairs and the dd^c constant.
const PAIRING_SCALE: f64 = 8.0 / std::f64::consts::PI;

pub type Mat3 = [[Complex64; 3]; 3];

/// Axis-aligned box in R^6, identified with C^3 by (x1,y1,x2,y2,x3,y3).
#[derive(Clone, Debug)]
pub struct Region {
    pub lo: [f64; 6],
    pub hi: [f64; 6],
}

impl Region {
    pub fn cube(lo: f64, hi: f64) -> Self {
        Region {
            lo: [lo; 6],
            hi: [hi; 6],
        }
    }

    pub fn volume(&self) -> f64 {
        (0..6).map(|a| self.hi[a] - self.lo[a]).product()
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> [Complex64; 3] {
        let mut p = [0.0; 6];
        for (a, v) in p.iter_mut().enumerate() {
            *v = self.lo[a] + (self.hi[a] - self.lo[a]) * rng.gen::<f64>();
        }
        [
            Complex64::new(p[0], p[1]),
            Complex64::new(p[2], p[3]),
            Complex64::new(p[4], p[5]),
        ]
    }
}

/// Excised neighborhoods of declared indeterminacy points.
#[derive(Clone, Debug)]
pub struct Guard {
    pub radius: f64,
    pub points: Vec<[Complex64; 3]>,
}

impl Guard {
    fn masks(&self, z: &[Complex64; 3]) -> bool {
        self.points.iter().any(|q| {
            let d2: f64 = (0..3).map(|j| (z[j] - q[j]).norm_sqr()).sum();
            d2.sqrt() < self.radius
        })
    }
}

/// Smooth compactly supported scalar weight.
#[derive(Clone, Debug)]
pub enum BumpFn {
    /// (1 - |p - center|²/radius²)³ inside the ball, 0 outside.
    Radial { center: [f64; 6], radius: f64 },
    Zero,
    One,
}

impl BumpFn {
    pub fn eval(&self, z: &[Complex64; 3]) -> f64 {
        match self {
            BumpFn::Zero => 0.0,
            BumpFn::One => 1.0,
            BumpFn::Radial { center, radius } => {
                let p = [z[0].re, z[0].im, z[1].re, z[1].im, z[2].re, z[2].im];
                let d2: f64 = (0..6).map(|a| (p[a] - center[a]) * (p[a] - center[a])).sum();
                let t = d2 / (radius * radius);
                if t >= 1.0 {
                    0.0
                } else {
                    (1.0 - t).powi(3)
                }
            }
        }
    }
}

/// Smooth (2,2) test form given as a wedge of two (1,1) factor matrices.
#[derive(Clone, Debug)]
pub enum EtaForm {
    /// Square of the standard Euclidean Kähler form (identity factors).
    Euclidean,
    /// Square of the chart Fubini–Study form.
    FubiniStudySquared,
    Zero,
}

fn identity3() -> Mat3 {
    let mut m = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (j, row) in m.iter_mut().enumerate() {
        row[j] = Complex64::new(1.0, 0.0);
    }
    m
}

fn fubini_study_matrix(z: &[Complex64; 3]) -> Mat3 {
    let w = 1.0 + z.iter().map(Complex64::norm_sqr).sum::<f64>();
    let mut m = [[Complex64::new(0.0, 0.0); 3]; 3];
    for j in 0..3 {
        for k in 0..3 {
            let kron = if j == k {
                Complex64::new(w, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            m[j][k] = (kron - z[j].conj() * z[k]) / (w * w);
        }
    }
    m
}

impl EtaForm {
    pub fn factors(&self, z: &[Complex64; 3]) -> (Mat3, Mat3) {
        match self {
            EtaForm::Euclidean => (identity3(), identity3()),
            EtaForm::Zero => {
                let z3 = [[Complex64::new(0.0, 0.0); 3]; 3];
                (z3, z3)
            }
            EtaForm::FubiniStudySquared => {
                let f = fubini_study_matrix(z);
                (f, f)
            }
        }
    }

    /// All built-in forms are positive semidefinite wedges.
    pub fn is_positive(&self) -> bool {
        true
    }
}

/// One pairing experiment: map, singular potential u = sign·log|P(1,z)|,
/// test form, bump weight, ε-schedule, sampling box, and indeterminacy
/// guard.
#[derive(Clone)]
pub struct WedgeExperiment {
    pub map: RationalMap,
    /// u = potential_sign · log|potential_poly(1, z)|.
    pub potential_poly: Poly,
    pub potential_sign: f64,
    pub eta: EtaForm,
    pub test_fn: BumpFn,
    pub eps_schedule: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
    pub region: Region,
    pub guard: Guard,
}

impl WedgeExperiment {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.eps_schedule.is_empty() {
            return Err(CoreError::Validation("eps schedule is empty".into()));
        }
        if self
            .eps_schedule
            .iter()
            .any(|&e| !(e > 0.0) || !e.is_finite())
        {
            return Err(CoreError::Validation(
                "eps values must be positive and finite".into(),
            ));
        }
        for w in self.eps_schedule.windows(2) {
            if !(w[1] < w[0]) {
                return Err(CoreError::Validation(
                    "eps schedule must be strictly decreasing".into(),
                ));
            }
        }
        for a in 0..6 {
            if !(self.region.lo[a] < self.region.hi[a]) {
                return Err(CoreError::Validation("region box is empty".into()));
            }
        }
        if self.n_samples == 0 {
            return Err(CoreError::Validation("need at least one sample".into()));
        }
        if !(self.guard.radius >= 0.0) || !self.guard.radius.is_finite() {
            return Err(CoreError::Validation(
                "guard radius must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    /// Distance from the sampling box to the nearest declared indeterminacy
    /// point; `None` when no points are declared.
    pub fn min_guard_distance(&self) -> Option<f64> {
        self.guard
            .points
            .iter()
            .map(|q| {
                let p = [q[0].re, q[0].im, q[1].re, q[1].im, q[2].re, q[2].im];
                let mut d2 = 0.0;
                for a in 0..6 {
                    let d = (self.region.lo[a] - p[a]).max(p[a] - self.region.hi[a]).max(0.0);
                    d2 += d * d;
                }
                d2.sqrt()
            })
            .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |m| m.min(d))))
    }

    fn region_samples(&self) -> Vec<[Complex64; 3]> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.n_samples)
            .map(|_| self.region.sample(&mut rng))
            .collect()
    }
}

/// Monte Carlo estimate with its standard error and masking diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct PairEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_kept: usize,
    pub masked_fraction: f64,
}

/// Polarized determinant of three 3x3 Hermitian matrices: the coefficient
/// of xyw in det(xH + yA + wB). Equals 6·det for equal arguments; real for
/// Hermitian inputs.
pub fn mixed_det(h: &Mat3, a: &Mat3, b: &Mat3) -> f64 {
    const PERMS: [([usize; 3], f64); 6] = [
        ([0, 1, 2], 1.0),
        ([1, 2, 0], 1.0),
        ([2, 0, 1], 1.0),
        ([0, 2, 1], -1.0),
        ([2, 1, 0], -1.0),
        ([1, 0, 2], -1.0),
    ];
    let mut sum = Complex64::new(0.0, 0.0);
    for (s, ssign) in &PERMS {
        for (t, tsign) in &PERMS {
            sum += h[s[0]][t[0]] * a[s[1]][t[1]] * b[s[2]][t[2]] * (ssign * tsign);
        }
    }
    sum.re
}

fn det3c(m: &Mat3) -> Complex64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Evaluates a map in the chart x0 = 1 by dehomogenizing with the first
/// component; `None` when the denominator collapses or values blow up.
fn chart_eval(f: &RationalMap, z: &[Complex64; 3]) -> Option<[Complex64; 3]> {
    let x = [Complex64::new(1.0, 0.0), z[0], z[1], z[2]];
    let mut y = [Complex64::new(0.0, 0.0); N_VARS];
    let mut maxmod = 0.0f64;
    for (i, c) in f.components.iter().enumerate() {
        y[i] = c.eval_complex(&x);
        let n = y[i].norm();
        if !n.is_finite() {
            return None;
        }
        maxmod = maxmod.max(n);
    }
    if maxmod == 0.0 || y[0].norm() < 1e-12 * maxmod {
        return None;
    }
    Some([y[1] / y[0], y[2] / y[0], y[3] / y[0]])
}

fn poly_partial(p: &Poly, var: usize) -> Poly {
    let mut out = Poly::zero();
    for (exps, coeff) in p.terms() {
        if exps[var] > 0 {
            let mut e = *exps;
            e[var] -= 1;
            out.add_term(e, &(BigInt::from(exps[var]) * coeff));
        }
    }
    out
}

/// Symbolic partials of a chart map g_j = P_j(1,z)/P_0(1,z), evaluated
/// exactly from polynomial derivatives.
struct ChartJacobian {
    components: [Poly; N_VARS],
    partials: Vec<[Poly; 3]>,
}

impl ChartJacobian {
    fn new(f: &RationalMap) -> Self {
        let partials = f
            .components
            .iter()
            .map(|p| [poly_partial(p, 1), poly_partial(p, 2), poly_partial(p, 3)])
            .collect();
        ChartJacobian {
            components: f.components.clone(),
            partials,
        }
    }

    /// J[j][k] = ∂g_{j+1}/∂z_{k+1} at z; `None` on collapse.
    fn at(&self, z: &[Complex64; 3]) -> Option<Mat3> {
        let x = [Complex64::new(1.0, 0.0), z[0], z[1], z[2]];
        let p: Vec<Complex64> = self.components.iter().map(|c| c.eval_complex(&x)).collect();
        let maxmod = p.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        if !maxmod.is_finite() || maxmod == 0.0 || p[0].norm() < 1e-12 * maxmod {
            return None;
        }
        let p0sq = p[0] * p[0];
        let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
        for j in 0..3 {
            for k in 0..3 {
                let dj = self.partials[j + 1][k].eval_complex(&x);
                let d0 = self.partials[0][k].eval_complex(&x);
                let v = (dj * p[0] - p[j + 1] * d0) / p0sq;
                if !v.re.is_finite() || !v.im.is_finite() {
                    return None;
                }
                out[j][k] = v;
            }
        }
        Some(out)
    }
}

/// Pullback of a (1,1) factor matrix through a holomorphic Jacobian:
/// out_{ab} = Σ J_{ja} A_{jk} conj(J_{kb}).
fn pull_form(j: &Mat3, a: &Mat3) -> Mat3 {
    let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (ai, row) in out.iter_mut().enumerate() {
        for (bi, v) in row.iter_mut().enumerate() {
            let mut s = Complex64::new(0.0, 0.0);
            for jj in 0..3 {
                for kk in 0..3 {
                    s += j[jj][ai] * a[jj][kk] * j[kk][bi].conj();
                }
            }
            *v = s;
        }
    }
    out
}

/// Complex Hessian H_{jk} = ∂²u/∂z_j∂z̄_k by central differences of the
/// real 6x6 Hessian; Hermitian by construction. `None` when any stencil
/// evaluation masks.
fn fd_complex_hessian(
    u: &dyn Fn(&[Complex64; 3]) -> Option<f64>,
    z: &[Complex64; 3],
    h: f64,
) -> Option<Mat3> {
    let p0 = [z[0].re, z[0].im, z[1].re, z[1].im, z[2].re, z[2].im];
    let at = |p: &[f64; 6]| {
        u(&[
            Complex64::new(p[0], p[1]),
            Complex64::new(p[2], p[3]),
            Complex64::new(p[4], p[5]),
        ])
    };
    let u0 = at(&p0)?;
    let mut d = [[0.0f64; 6]; 6];
    for a in 0..6 {
        let mut pp = p0;
        pp[a] += h;
        let mut pm = p0;
        pm[a] -= h;
        d[a][a] = (at(&pp)? - 2.0 * u0 + at(&pm)?) / (h * h);
    }
    for a in 0..6 {
        for b in (a + 1)..6 {
            let mut p1 = p0;
            p1[a] += h;
            p1[b] += h;
            let mut p2 = p0;
            p2[a] += h;
            p2[b] -= h;
            let mut p3 = p0;
            p3[a] -= h;
            p3[b] += h;
            let mut p4 = p0;
            p4[a] -= h;
            p4[b] -= h;
            let v = (at(&p1)? - at(&p2)? - at(&p3)? + at(&p4)?) / (4.0 * h * h);
            d[a][b] = v;
            d[b][a] = v;
        }
    }
    let mut hm = [[Complex64::new(0.0, 0.0); 3]; 3];
    for j in 0..3 {
        for k in 0..3 {
            let re = 0.25 * (d[2 * j][2 * k] + d[2 * j + 1][2 * k + 1]);
            let im = 0.25 * (d[2 * j][2 * k + 1] - d[2 * j + 1][2 * k]);
            hm[j][k] = Complex64::new(re, im);
        }
    }
    Some(hm)
}

fn potential_value(exp: &WedgeExperiment, eps: f64, z: &[Complex64; 3]) -> Option<f64> {
    let x = [Complex64::new(1.0, 0.0), z[0], z[1], z[2]];
    let g = exp.potential_poly.eval_complex(&x);
    let m2 = g.norm_sqr() + eps * eps;
    if !m2.is_finite() || !(m2 > 0.0) {
        return None;
    }
    Some(exp.potential_sign * 0.5 * m2.ln())
}

enum Side {
    Left,
    Right,
}

fn pair_side(exp: &WedgeExperiment, eps: f64, side: Side) -> Result<PairEstimate, CoreError> {
    exp.validate()?;
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(CoreError::Validation("eps must be positive".into()));
    }
    let inverse = exp
        .map
        .inverse
        .as_deref()
        .ok_or(CoreError::MissingInverse)?;
    let inv_jac = ChartJacobian::new(inverse);
    let samples = exp.region_samples();
    let ueps = |z: &[Complex64; 3]| potential_value(exp, eps, z);
    let densities: Vec<Option<f64>> = samples
        .par_iter()
        .map(|z| {
            if exp.guard.masks(z) {
                return None;
            }
            match side {
                Side::Left => {
                    let w = chart_eval(inverse, z)?;
                    let jinv = inv_jac.at(z)?;
                    let (a_raw, b_raw) = exp.eta.factors(&w);
                    let a = pull_form(&jinv, &a_raw);
                    let b = pull_form(&jinv, &b_raw);
                    let hm = fd_complex_hessian(&ueps, z, FD_STEP)?;
                    Some(exp.test_fn.eval(z) * mixed_det(&hm, &a, &b))
                }
                Side::Right => {
                    let w = chart_eval(inverse, z)?;
                    let jinv = inv_jac.at(z)?;
                    let weight = det3c(&jinv).norm_sqr();
                    let composed =
                        |y: &[Complex64; 3]| chart_eval(&exp.map, y).and_then(|fy| ueps(&fy));
                    let hm = fd_complex_hessian(&composed, &w, FD_STEP)?;
                    let (a, b) = exp.eta.factors(&w);
                    let beta = exp.test_fn.eval(&chart_eval(&exp.map, &w)?);
                    Some(beta * mixed_det(&hm, &a, &b) * weight)
                }
            }
        })
        .collect();
    aggregate(exp, &densities)
}

fn aggregate(exp: &WedgeExperiment, densities: &[Option<f64>]) -> Result<PairEstimate, CoreError> {
    let n = densities.len();
    let kept: Vec<f64> = densities.iter().flatten().copied().collect();
    let masked_fraction = (n - kept.len()) as f64 / n as f64;
    if masked_fraction > 0.05 {
        return Err(CoreError::GuardAbort {
            fraction: masked_fraction,
        });
    }
    let scale = exp.region.volume() * PAIRING_SCALE;
    let k = kept.len() as f64;
    let mean = pairwise_sum(&kept) / k;
    let centered: Vec<f64> = kept.iter().map(|d| (d - mean) * (d - mean)).collect();
    let std_error = if kept.len() > 1 {
        scale * (pairwise_sum(&centered) / (k - 1.0) / k).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(PairEstimate {
        value: scale * mean,
        std_error,
        n_kept: kept.len(),
        masked_fraction,
    })
}

/// ∫ β · dd^c(u_eps) ∧ f_*η over the region; f_*η is pulled back through
/// the declared inverse. Aborts when more than 5% of samples mask.
pub fn pair_left(exp: &WedgeExperiment, eps: f64) -> Result<PairEstimate, CoreError> {
    pair_side(exp, eps, Side::Left)
}

/// ∫ (β∘f) · dd^c(u_eps∘f) ∧ η over f⁻¹(region), sampled by transporting
/// the same seeded region samples through the inverse with the holomorphic
/// Jacobian weight |det Df⁻¹|². Identical to `pair_left` to the last bit
/// for the identity map.
pub fn pair_right(exp: &WedgeExperiment, eps: f64) -> Result<PairEstimate, CoreError> {
    pair_side(exp, eps, Side::Right)
}

/// Fraction of unmasked samples where the pairing density is at least
/// -δ_num, with δ_num the Richardson discrepancy of the h and h/2 stencils
/// plus a rounding floor. Positive (psh potential, positive form) data
/// should score ≥ 0.99.
pub fn positivity_scan(exp: &WedgeExperiment, eps: f64) -> Result<f64, CoreError> {
    exp.validate()?;
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(CoreError::Validation("eps must be positive".into()));
    }
    let samples = exp.region_samples();
    let ueps = |z: &[Complex64; 3]| potential_value(exp, eps, z);
    let flags: Vec<Option<bool>> = samples
        .par_iter()
        .map(|z| {
            if exp.guard.masks(z) {
                return None;
            }
            let h1 = fd_complex_hessian(&ueps, z, FD_STEP)?;
            let h2 = fd_complex_hessian(&ueps, z, FD_STEP / 2.0)?;
            let (a, b) = exp.eta.factors(z);
            let m1 = mixed_det(&h1, &a, &b);
            let m2 = mixed_det(&h2, &a, &b);
            let delta = (4.0 / 3.0) * (m1 - m2).abs() + 1e-12 * (1.0 + m1.abs());
            Some(m2 >= -delta)
        })
        .collect();
    let kept = flags.iter().flatten().count();
    let positive = flags.iter().flatten().filter(|&&p| p).count();
    Ok(if kept == 0 {
        1.0
    } else {
        positive as f64 / kept as f64
    })
}

/// Weighted samples after transport by a map, with exact mass accounting.
#[derive(Clone, Debug)]
pub struct PushedMeasure {
    pub samples: Vec<([Complex64; 3], f64)>,
    pub lost_mass: f64,
    pub kept_mass: f64,
}

/// Transports each (point, weight) to (f(point), weight) in the chart;
/// weights of masked points accumulate as lost mass.
pub fn push_measure(f: &RationalMap, samples: &[([Complex64; 3], f64)]) -> PushedMeasure {
    let mut out = Vec::with_capacity(samples.len());
    let mut kept = Vec::new();
    let mut lost = Vec::new();
    for (z, weight) in samples {
        match chart_eval(f, z) {
            Some(y) => {
                out.push((y, *weight));
                kept.push(*weight);
            }
            None => lost.push(*weight),
        }
    }
    PushedMeasure {
        samples: out,
        lost_mass: pairwise_sum(&lost),
        kept_mass: pairwise_sum(&kept),
    }
}

fn identity_with_inverse() -> RationalMap {
    let mut m = RationalMap::identity();
    m.inverse = Some(Box::new(RationalMap::identity()));
    m
}

/// Identity-map experiment whose ε → 0 limit is the slice integral of the
/// bump against the Euclidean form over the hyperplane z1 = 0; see
/// `slice_oracle`.
pub fn slice_experiment(n_samples: usize, seed: u64) -> WedgeExperiment {
    WedgeExperiment {
        map: identity_with_inverse(),
        potential_poly: Poly::var(1),
        potential_sign: 1.0,
        eta: EtaForm::Euclidean,
        test_fn: BumpFn::Radial {
            center: [0.0; 6],
            radius: 0.7,
        },
        eps_schedule: vec![0.32, 0.16, 0.08, 0.04],
        n_samples,
        seed,
        region: Region::cube(-0.8, 0.8),
        guard: Guard {
            radius: 0.0,
            points: vec![],
        },
    }
}

/// Closed form of the ε-smoothed slice pairing for `slice_experiment`.
///
/// The regularized density ε²/(|z1|² + ε²)² integrated against the radial
/// bump reduces to a one-dimensional rational integral with an elementary
/// antiderivative; `eps = 0` returns the limit 2π²R⁴/5 (the bump restricted
/// to the slice z1 = 0 integrates to π²R⁴/20, and the Euclidean form
/// contributes a factor 8).
pub fn slice_oracle(bump_radius: f64, eps: f64) -> f64 {
    let pi2 = std::f64::consts::PI.powi(2);
    let r2 = bump_radius * bump_radius;
    if eps == 0.0 {
        return 0.4 * pi2 * r2 * r2;
    }
    let e2 = eps * eps;
    let b = r2 + e2;
    let antideriv = b.powi(5) * (1.0 / e2 - 1.0 / b) - 5.0 * b.powi(4) * (b / e2).ln()
        + 10.0 * b.powi(3) * (b - e2)
        - 5.0 * b.powi(2) * (b * b - e2 * e2)
        + (5.0 * b / 3.0) * (b.powi(3) - e2.powi(3))
        - 0.25 * (b.powi(4) - e2.powi(4));
    2.0 * pi2 * e2 * antideriv / (5.0 * r2.powi(3))
}

/// Cremona-involution experiment on a box away from the coordinate
/// hyperplanes, with the squared Fubini–Study form and the potential of the
/// invariant hyperplane x1 = x2, which cuts through the bump support while
/// staying clear of the involution's collapse locus.
pub fn involution_experiment(n_samples: usize, seed: u64) -> WedgeExperiment {
    WedgeExperiment {
        map: cremona_catalog_entry(),
        potential_poly: Poly::var(1).sub(&Poly::var(2)),
        potential_sign: 1.0,
        eta: EtaForm::FubiniStudySquared,
        test_fn: BumpFn::Radial {
            center: [1.0; 6],
            radius: 0.35,
        },
        eps_schedule: vec![1e-1, 3e-2, 1e-2],
        n_samples,
        seed,
        region: Region::cube(0.6, 1.4),
        guard: Guard {
            radius: 1e-2,
            points: vec![[Complex64::new(0.0, 0.0); 3]],
        },
    }
}
