//! Invariant potentials by normalized pullback: the one-step potential, the
//! shifted Green recursion on fixed sphere samples, raw reduced-iterate
//! potentials, invariance residuals, and Lelong slope probes.

use num::complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::maps::{compose, evaluate, reduce, EvalResult, RationalMap};
use crate::poly::N_VARS;
use crate::sampling::{fixed_directions, sphere_samples};
use crate::CoreError;

/// Relative collapse threshold below which a point counts as
/// indeterminacy-adjacent and is masked.
pub const INDETERMINACY_CUTOFF: f64 = 1e-30;

/// Largest final increment for which a field counts as converged.
pub const CONVERGENCE_SUP_DELTA: f64 = 1e-6;

/// Values of the shifted pullback recursion on a fixed sample set.
pub struct PotentialField {
    pub map_id: String,
    pub lambda: f64,
    pub seed: u64,
    pub samples: Vec<[Complex64; N_VARS]>,
    /// `values[m][s]`: shifted potential of iteration order m+1 at sample s;
    /// `None` once the orbit hits the indeterminacy cutoff.
    pub values: Vec<Vec<Option<f64>>>,
    /// `sup_deltas[m-1] = sup_s |phi_{m+1} - phi_m|` over unmasked samples.
    pub sup_deltas: Vec<f64>,
    /// Constant subtracted from the one-step potential: its maximum over the
    /// sample set, so every stored value is nonpositive at step one.
    pub shift: f64,
}

impl PotentialField {
    pub fn n_iters(&self) -> usize {
        self.values.len()
    }

    /// Values of the deepest iterate.
    pub fn final_values(&self) -> &[Option<f64>] {
        self.values.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Number of masked samples at iteration index `m` (0-based).
    pub fn masked_count(&self, m: usize) -> usize {
        self.values[m].iter().filter(|v| v.is_none()).count()
    }

    /// Rows `n,sup_delta,masked_count` for n = 1..=N (no delta at n = 1).
    pub fn csv(&self) -> String {
        let mut out = String::from("n,sup_delta,masked_count\n");
        for m in 0..self.values.len() {
            let sup = if m == 0 {
                String::new()
            } else {
                format!("{:.12e}", self.sup_deltas[m - 1])
            };
            out.push_str(&format!("{},{},{}\n", m + 1, sup, self.masked_count(m)));
        }
        out
    }
}

fn euclid_norm(x: &[Complex64; N_VARS]) -> f64 {
    x.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

/// One-step potential (1/lambda)(log‖F(x)‖ - d·log‖x‖) with the Euclidean
/// norm; invariant under scaling of x. Errors with
/// `IndeterminateProximity` when the image collapses below the relative
/// cutoff.
pub fn phi1(f: &RationalMap, lambda: f64, x: &[Complex64; N_VARS]) -> Result<f64, CoreError> {
    if !(lambda > 0.0) {
        return Err(CoreError::Validation("lambda must be positive".into()));
    }
    let norm_x = euclid_norm(x);
    if norm_x == 0.0 || !norm_x.is_finite() {
        return Err(CoreError::ZeroPoint);
    }
    let mut image = [Complex64::new(0.0, 0.0); N_VARS];
    for (i, c) in f.components.iter().enumerate() {
        image[i] = c.eval_complex(x);
    }
    let log_ratio = euclid_norm(&image).ln() - f64::from(f.degree) * norm_x.ln();
    if !log_ratio.is_finite() || log_ratio < INDETERMINACY_CUTOFF.ln() {
        return Err(CoreError::IndeterminateProximity);
    }
    Ok(log_ratio / lambda)
}

/// One-step potentials along a projectively normalized orbit: entry k is
/// phi1 at the k-th image of `x`, `None` from the first masked step on.
fn orbit_phi_values(
    f: &RationalMap,
    lambda: f64,
    x: &[Complex64; N_VARS],
    n: usize,
) -> Vec<Option<f64>> {
    let mut out = Vec::with_capacity(n);
    let mut y = *x;
    for k in 0..n {
        match phi1(f, lambda, &y) {
            Ok(v) => out.push(Some(v)),
            Err(_) => break,
        }
        if k + 1 < n {
            match evaluate(f, &y) {
                Ok(EvalResult::Point(p)) => y = p,
                _ => break,
            }
        }
    }
    out.resize(n, None);
    out
}

/// Runs the shifted recursion phi_n = phi_{n-1} + lambda^{-(n-1)}
/// phi1_shifted(f^{n-1} x) on `n_samples` seeded sphere samples for
/// n = 1..=n_iters. Requires a map flagged 1-stable downstairs whose first
/// degree matches `lambda` within 1e-9.
pub fn green_iterate(
    f: &RationalMap,
    lambda: f64,
    n_iters: u32,
    n_samples: usize,
    seed: u64,
) -> Result<PotentialField, CoreError> {
    if !f.flags.is_1_stable_downstairs {
        return Err(CoreError::UnstableMap);
    }
    if !(lambda > 1.0) {
        return Err(CoreError::Validation("lambda must exceed 1".into()));
    }
    let d1 = f64::from(f.degree);
    if (lambda - d1).abs() > 1e-9 {
        return Err(CoreError::LambdaMismatch {
            expected: d1,
            got: lambda,
        });
    }
    if n_iters < 2 {
        return Err(CoreError::Validation("n_iters must be at least 2".into()));
    }
    if n_samples == 0 {
        return Err(CoreError::Validation("need at least one sample".into()));
    }
    let samples = sphere_samples(n_samples, seed);
    let n = n_iters as usize;
    let orbit_values: Vec<Vec<Option<f64>>> = samples
        .par_iter()
        .map(|x| orbit_phi_values(f, lambda, x, n))
        .collect();
    let shift = orbit_values
        .iter()
        .filter_map(|g| g[0])
        .fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Err(CoreError::Validation(
            "every sample is masked at the first step".into(),
        ));
    }
    let mut values = vec![vec![None; samples.len()]; n];
    for (s, g) in orbit_values.iter().enumerate() {
        let mut acc = 0.0;
        let mut pw = 1.0;
        for (m, gv) in g.iter().enumerate() {
            match gv {
                Some(v) => {
                    acc += pw * (v - shift);
                    values[m][s] = Some(acc);
                    pw /= lambda;
                }
                None => break,
            }
        }
    }
    let sup_deltas = (1..n)
        .map(|m| {
            let mut sup = 0.0f64;
            for s in 0..samples.len() {
                if let (Some(a), Some(b)) = (values[m][s], values[m - 1][s]) {
                    sup = sup.max((a - b).abs());
                }
            }
            sup
        })
        .collect();
    Ok(PotentialField {
        map_id: f.id_string(),
        lambda,
        seed,
        samples,
        values,
        sup_deltas,
        shift,
    })
}

fn maxmod_normalize(x: &[Complex64; N_VARS]) -> Result<[Complex64; N_VARS], CoreError> {
    let m = x.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    if m == 0.0 || !m.is_finite() {
        return Err(CoreError::ZeroPoint);
    }
    let lead = x.iter().position(|c| c.norm() == m).expect("max attained");
    let pivot = x[lead];
    let mut out = *x;
    for c in &mut out {
        *c /= pivot;
    }
    Ok(out)
}

/// Direct potentials of the reduced iterates: entry N-1 holds
/// lambda^{-N}(log‖F_N(x)‖ - d_N log‖x‖) with F_N the N-fold reduced
/// composition. No stability or monotonicity is assumed; per-iterate
/// masking only. Samples are supplied by the caller (seed is recorded
/// as 0) and normalized to max-modulus 1 before evaluation.
pub fn raw_iterate(
    f: &RationalMap,
    lambda: f64,
    n_iters: u32,
    samples: &[[Complex64; N_VARS]],
) -> Result<PotentialField, CoreError> {
    if !(lambda > 0.0) {
        return Err(CoreError::Validation("lambda must be positive".into()));
    }
    if n_iters < 1 {
        return Err(CoreError::Validation("n_iters must be at least 1".into()));
    }
    if samples.is_empty() {
        return Err(CoreError::Validation("need at least one sample".into()));
    }
    let pts: Vec<[Complex64; N_VARS]> = samples
        .iter()
        .map(maxmod_normalize)
        .collect::<Result<_, _>>()?;
    let n = n_iters as usize;
    let mut values = vec![vec![None; pts.len()]; n];
    let mut g = reduce(f)?;
    for (m, row) in values.iter_mut().enumerate() {
        if m > 0 {
            g = reduce(&compose(f, &g)?)?;
        }
        let d = f64::from(g.degree);
        let lam_pow = lambda.powi(m as i32 + 1);
        for (s, x) in pts.iter().enumerate() {
            let norm_x = euclid_norm(x);
            let mut image = [Complex64::new(0.0, 0.0); N_VARS];
            for (i, c) in g.components.iter().enumerate() {
                image[i] = c.eval_complex(x);
            }
            let log_ratio = euclid_norm(&image).ln() - d * norm_x.ln();
            // the raw log-ratio grows like lambda^n times the bounded
            // potential, so the proximity cutoff applies to the normalized
            // value rather than the ratio itself
            let value = log_ratio / lam_pow;
            row[s] = (log_ratio.is_finite() && value >= INDETERMINACY_CUTOFF.ln() / lambda)
                .then_some(value);
        }
    }
    let sup_deltas = (1..n)
        .map(|m| {
            let mut sup = 0.0f64;
            for s in 0..pts.len() {
                if let (Some(a), Some(b)) = (values[m][s], values[m - 1][s]) {
                    sup = sup.max((a - b).abs());
                }
            }
            sup
        })
        .collect();
    Ok(PotentialField {
        map_id: f.id_string(),
        lambda,
        seed: 0,
        samples: pts,
        values,
        sup_deltas,
        shift: 0.0,
    })
}

fn extended_residual(
    f: &RationalMap,
    lambda: f64,
    shift: f64,
    n: usize,
    x: &[Complex64; N_VARS],
) -> Option<f64> {
    let g = orbit_phi_values(f, lambda, x, n + 1);
    let mut ux = 0.0;
    let mut ufx = 0.0;
    let mut pw = 1.0;
    for k in 0..n {
        ux += pw * (g[k]? - shift);
        ufx += pw * (g[k + 1]? - shift);
        pw /= lambda;
    }
    Some((ux - (g[0]? - shift) - ufx / lambda).abs())
}

/// Sup over unmasked samples of |u(x) - phi1_shifted(x) - u(f(x))/lambda|
/// with u the deepest stored iterate, recomputed along orbits extended by
/// one step. Errors with `NotConverged` unless the final increment of the
/// field is below 1e-6.
pub fn invariance_residual(
    field: &PotentialField,
    f: &RationalMap,
    lambda: f64,
) -> Result<f64, CoreError> {
    let last_sup = *field
        .sup_deltas
        .last()
        .ok_or_else(|| CoreError::Validation("field has a single iterate".into()))?;
    if !(last_sup < CONVERGENCE_SUP_DELTA) {
        return Err(CoreError::NotConverged {
            last_sup_delta: last_sup,
        });
    }
    let n = field.n_iters();
    let final_row = field.values.last().expect("nonempty field");
    let residuals: Vec<Option<f64>> = field
        .samples
        .par_iter()
        .enumerate()
        .map(|(s, x)| {
            final_row[s]?;
            extended_residual(f, lambda, field.shift, n, x)
        })
        .collect();
    let sup = residuals
        .into_iter()
        .flatten()
        .fold(f64::NEG_INFINITY, f64::max);
    if !sup.is_finite() {
        return Err(CoreError::Validation("every sample is masked".into()));
    }
    Ok(sup)
}

/// Sup over samples of |u(x) - (phi1(x) - shift) - u(f(x))/lambda| for a
/// caller-supplied potential; masked samples are skipped.
pub fn residual_against(
    f: &RationalMap,
    lambda: f64,
    shift: f64,
    u: &dyn Fn(&[Complex64; N_VARS]) -> Option<f64>,
    samples: &[[Complex64; N_VARS]],
) -> Result<f64, CoreError> {
    if !(lambda > 0.0) {
        return Err(CoreError::Validation("lambda must be positive".into()));
    }
    let mut sup = f64::NEG_INFINITY;
    for x in samples {
        let r = (|| {
            let ux = u(x)?;
            let p1 = phi1(f, lambda, x).ok()?;
            let y = match evaluate(f, x) {
                Ok(EvalResult::Point(p)) => p,
                _ => return None,
            };
            Some((ux - (p1 - shift) - u(&y)? / lambda).abs())
        })();
        if let Some(r) = r {
            sup = sup.max(r);
        }
    }
    if !sup.is_finite() {
        return Err(CoreError::Validation("every sample is masked".into()));
    }
    Ok(sup)
}

/// Pointwise unshifted recursion potential of order `n_iters`: the partial
/// sum of lambda^{-k} phi1 along the normalized orbit. `None` when the
/// orbit masks before the last step.
pub fn green_potential_fn(
    f: &RationalMap,
    lambda: f64,
    n_iters: u32,
) -> impl Fn(&[Complex64; N_VARS]) -> Option<f64> + Sync + '_ {
    let n = n_iters as usize;
    move |x| {
        let g = orbit_phi_values(f, lambda, x, n);
        let mut acc = 0.0;
        let mut pw = 1.0;
        for v in &g {
            acc += pw * (*v)?;
            pw /= lambda;
        }
        Some(acc)
    }
}

/// Closed-form invariant potential of the coordinate-squaring map:
/// log max_i|x_i| - log‖x‖.
pub fn log_max_minus_log_norm(x: &[Complex64; N_VARS]) -> Option<f64> {
    let maxmod = x.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    if maxmod <= 0.0 || !maxmod.is_finite() {
        return None;
    }
    Some(maxmod.ln() - euclid_norm(x).ln())
}

/// Views a potential on C^4 in the affine chart x0 = 1.
pub fn chart_potential<'a>(
    u: &'a dyn Fn(&[Complex64; N_VARS]) -> Option<f64>,
) -> impl Fn(&[Complex64; 3]) -> Option<f64> + 'a {
    move |z| u(&[Complex64::new(1.0, 0.0), z[0], z[1], z[2]])
}

/// Dyadic probe radii 2^-4 .. 2^-10.
pub fn default_probe_radii() -> Vec<f64> {
    (4..=10).map(|k| 2f64.powi(-k)).collect()
}

/// Circle-mean diagnostics of a local potential around a center point.
#[derive(Debug, Clone, Serialize)]
pub struct LelongReport {
    /// Least-squares slope of the means against log radius.
    pub slope: f64,
    pub radii: Vec<f64>,
    pub means: Vec<f64>,
    pub masked_fractions: Vec<f64>,
    pub n_dirs: usize,
    pub seed: u64,
}

/// Estimates the Lelong number of a chart potential at `center`: means of
/// `u` over antipodal sphere directions at each radius, then the
/// least-squares slope against log r. Radii must be strictly decreasing and
/// at least 1e-5; errors with `Unreliable` when more than 20% of the
/// directions mask at any radius.
pub fn lelong_probe(
    u: &dyn Fn(&[Complex64; 3]) -> Option<f64>,
    center: &[Complex64; 3],
    radii: &[f64],
    n_dirs: usize,
    seed: u64,
) -> Result<LelongReport, CoreError> {
    if radii.len() < 2 {
        return Err(CoreError::Validation("need at least two radii".into()));
    }
    for w in radii.windows(2) {
        if !(w[1] < w[0]) {
            return Err(CoreError::Validation(
                "radii must be strictly decreasing".into(),
            ));
        }
    }
    if radii.iter().any(|&r| !(r >= 1e-5) || !r.is_finite()) {
        return Err(CoreError::Validation("radii must be at least 1e-5".into()));
    }
    if n_dirs < 2 {
        return Err(CoreError::Validation("need at least two directions".into()));
    }
    let dirs = fixed_directions(n_dirs, seed);
    let mut means = Vec::with_capacity(radii.len());
    let mut masked_fractions = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut sum = 0.0;
        let mut kept = 0usize;
        for d in &dirs {
            let z = [
                center[0] + r * d[0],
                center[1] + r * d[1],
                center[2] + r * d[2],
            ];
            match u(&z) {
                Some(v) if v.is_finite() => {
                    sum += v;
                    kept += 1;
                }
                _ => {}
            }
        }
        let masked_fraction = (n_dirs - kept) as f64 / n_dirs as f64;
        if masked_fraction > 0.2 {
            return Err(CoreError::Unreliable { masked_fraction });
        }
        means.push(sum / kept as f64);
        masked_fractions.push(masked_fraction);
    }
    let ts: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let t_bar = ts.iter().sum::<f64>() / ts.len() as f64;
    let m_bar = means.iter().sum::<f64>() / means.len() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, m) in ts.iter().zip(&means) {
        num += (t - t_bar) * (m - m_bar);
        den += (t - t_bar) * (t - t_bar);
    }
    Ok(LelongReport {
        slope: num / den,
        radii: radii.to_vec(),
        means,
        masked_fractions,
        n_dirs,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{catalog_map, cremona_catalog_entry, squaring_map};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn one_step_potential_on_known_points() {
        let f = squaring_map();
        let e0 = [c(1.0), c(0.0), c(0.0), c(0.0)];
        assert_eq!(phi1(&f, 2.0, &e0).unwrap(), 0.0);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let x = [c(r), c(r), c(0.0), c(0.0)];
        let got = phi1(&f, 2.0, &x).unwrap();
        assert!((got - 0.25 * 0.5f64.ln()).abs() < 1e-14);
        // invariant under scaling
        let y = x.map(|v| v * Complex64::new(3.0, 4.0));
        assert!((phi1(&f, 2.0, &y).unwrap() - got).abs() < 1e-12);
    }

    #[test]
    fn collapse_near_indeterminacy_is_masked() {
        let j = cremona_catalog_entry();
        let e0 = [c(1.0), c(0.0), c(0.0), c(0.0)];
        assert!(matches!(
            phi1(&j, 3.0, &e0),
            Err(CoreError::IndeterminateProximity)
        ));
        let near = [c(1.0), c(1e-16), c(1e-16), c(1e-16)];
        assert!(matches!(
            phi1(&j, 3.0, &near),
            Err(CoreError::IndeterminateProximity)
        ));
        assert!(matches!(
            phi1(&j, 3.0, &[c(0.0); 4]),
            Err(CoreError::ZeroPoint)
        ));
    }

    #[test]
    fn squaring_field_converges_monotonically_to_closed_form() {
        let f = squaring_map();
        let field = green_iterate(&f, 2.0, 25, 512, 1).unwrap();
        assert_eq!(field.shift, 0.0);
        assert_eq!(field.values.len(), 25);
        assert_eq!(field.sup_deltas.len(), 24);
        for m in 1..25 {
            for s in 0..512 {
                let a = field.values[m][s].unwrap();
                let b = field.values[m - 1][s].unwrap();
                assert!(a <= b + 1e-12, "not monotone at m={m} s={s}");
            }
        }
        for i in 1..field.sup_deltas.len() {
            let ratio = field.sup_deltas[i] / field.sup_deltas[i - 1];
            assert!((0.45..=0.55).contains(&ratio), "ratio {ratio} at {i}");
        }
        // the balanced anchor pins the first increment to exactly (log 2)/4
        assert!((field.sup_deltas[0] - 0.25 * 2f64.ln()).abs() < 1e-14);
        for (s, v) in field.final_values().iter().enumerate() {
            let reference = log_max_minus_log_norm(&field.samples[s]).unwrap();
            assert!((v.unwrap() - reference).abs() < 1e-5, "sample {s}");
        }
        let resid = invariance_residual(&field, &f, 2.0).unwrap();
        assert!((0.0..1e-6).contains(&resid), "residual {resid}");
    }

    #[test]
    fn second_iterate_matches_recursion_base_case() {
        let f = squaring_map();
        let field = green_iterate(&f, 2.0, 2, 32, 3).unwrap();
        for (s, x) in field.samples.iter().enumerate() {
            let Ok(EvalResult::Point(y)) = evaluate(&f, x) else {
                panic!("holomorphic map evaluates everywhere");
            };
            let expected = 0.5 * (phi1(&f, 2.0, &y).unwrap() - field.shift);
            let delta = field.values[1][s].unwrap() - field.values[0][s].unwrap();
            assert!((delta - expected).abs() < 1e-14, "sample {s}");
        }
    }

    #[test]
    fn iteration_guards_reject_bad_inputs() {
        let f = squaring_map();
        assert!(matches!(
            green_iterate(&f, 2.0, 1, 8, 0),
            Err(CoreError::Validation(_))
        ));
        assert!(matches!(
            green_iterate(&f, 3.0, 4, 8, 0),
            Err(CoreError::LambdaMismatch { .. })
        ));
        let rot = catalog_map("monomial_rotation").unwrap();
        assert!(matches!(
            green_iterate(&rot, 1.0, 4, 8, 0),
            Err(CoreError::Validation(_))
        ));
        let j = cremona_catalog_entry();
        assert!(matches!(
            green_iterate(&j, 3.0, 4, 8, 0),
            Err(CoreError::UnstableMap)
        ));
        let short = green_iterate(&f, 2.0, 2, 8, 0).unwrap();
        assert!(matches!(
            invariance_residual(&short, &f, 2.0),
            Err(CoreError::NotConverged { .. })
        ));
    }

    #[test]
    fn raw_and_recursive_iterates_agree_for_holomorphic_maps() {
        let f = squaring_map();
        let field = green_iterate(&f, 2.0, 12, 64, 9).unwrap();
        let raw = raw_iterate(&f, 2.0, 12, &field.samples).unwrap();
        assert_eq!(raw.shift, 0.0);
        for m in 0..12 {
            for s in 0..64 {
                let a = field.values[m][s].unwrap();
                let b = raw.values[m][s].unwrap();
                assert!((a - b).abs() < 1e-12, "m={m} s={s}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn involution_even_raw_iterates_vanish() {
        let j = cremona_catalog_entry();
        let samples = sphere_samples(16, 4);
        let raw = raw_iterate(&j, 1.0, 4, &samples).unwrap();
        for s in 0..16 {
            assert_eq!(raw.values[1][s], Some(0.0));
            assert_eq!(raw.values[3][s], Some(0.0));
        }
        // odd iterates evaluate J itself: masked at the anchor points on
        // coordinate hyperplanes, defined at generic samples
        let defined = raw.values[0].iter().flatten().count();
        assert!(defined >= 5, "J is defined at generic samples");
        assert!(raw.masked_count(0) >= 10, "J masks at coordinate anchors");
    }

    #[test]
    fn closed_form_potential_has_zero_invariance_residual() {
        let f = squaring_map();
        let samples = sphere_samples(64, 2);
        let resid = residual_against(&f, 2.0, 0.0, &log_max_minus_log_norm, &samples).unwrap();
        assert!(resid < 1e-12, "residual {resid}");
    }

    #[test]
    fn hyperplane_potential_has_unit_slope() {
        let u = |z: &[Complex64; 3]| {
            let m = z[0].norm();
            (m > 1e-300).then(|| m.ln())
        };
        let center = [c(0.0), c(0.3), c(-0.7)];
        let rep = lelong_probe(&u, &center, &default_probe_radii(), 64, 11).unwrap();
        assert!((rep.slope - 1.0).abs() < 0.02, "slope {}", rep.slope);
        assert!(rep.masked_fractions.iter().all(|&f| f == 0.0));
    }

    #[test]
    fn smooth_potential_has_zero_slope() {
        let u = |z: &[Complex64; 3]| Some(z[0].norm_sqr() + 0.5 * z[1].re + 1.0);
        let center = [c(0.1), c(0.2), c(-0.3)];
        let rep = lelong_probe(&u, &center, &default_probe_radii(), 64, 11).unwrap();
        assert!(rep.slope.abs() < 0.02, "slope {}", rep.slope);
    }

    #[test]
    fn invariant_potential_is_smooth_at_generic_points() {
        let f = squaring_map();
        let g = green_potential_fn(&f, 2.0, 20);
        let chart = chart_potential(&g);
        let center = [c(0.31), Complex64::new(-0.12, 0.2), c(0.05)];
        let rep = lelong_probe(&chart, &center, &default_probe_radii(), 64, 13).unwrap();
        assert!(rep.slope.abs() <= 0.02, "slope {}", rep.slope);
    }

    #[test]
    fn probe_guards() {
        let masked = |z: &[Complex64; 3]| (z[0].re <= 0.0).then(|| z[0].norm_sqr());
        let center = [c(0.0); 3];
        let radii = default_probe_radii();
        assert!(matches!(
            lelong_probe(&masked, &center, &radii, 64, 17),
            Err(CoreError::Unreliable { .. })
        ));
        let ok = |_: &[Complex64; 3]| Some(1.0);
        assert!(lelong_probe(&ok, &center, &[0.1, 0.2], 64, 0).is_err());
        assert!(lelong_probe(&ok, &center, &[0.1, 1e-6], 64, 0).is_err());
        assert!(lelong_probe(&ok, &center, &[0.1], 64, 0).is_err());
        let zero = |_: &[Complex64; 3]| Some(0.0);
        let rep = lelong_probe(&zero, &center, &radii, 16, 0).unwrap();
        assert_eq!(rep.slope, 0.0);
    }

    #[test]
    fn field_csv_is_stable() {
        let f = squaring_map();
        let field = green_iterate(&f, 2.0, 3, 16, 0).unwrap();
        let csv = field.csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("n,sup_delta,masked_count"));
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().nth(2).unwrap().starts_with("2,"));
    }
}
