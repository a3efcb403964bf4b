//! Degree growth of iterates: exact degree sequences via compose-and-reduce,
//! dynamical-degree estimates with certified upper bounds, spectral radii as
//! exact rational enclosures, log-concavity checks, and stability reports.

use num::bigint::BigInt;
use serde::Serialize;

use crate::maps::{compose, compound_matrix, mat3_pow, monomial_degree, reduce, RationalMap};
use crate::ratmat::RatMat;
use crate::rational::{rat, rat_int, rat_to_f64, Rat};
use crate::rootcert;
use crate::CoreError;

/// Tolerance for the log-concavity margins lambda_p^2 >= lambda_{p-1} lambda_{p+1}.
pub const LOG_CONCAVITY_TOL: f64 = 1e-9;

/// Width of certified spectral-radius enclosures.
const ENCLOSURE_DEN: i64 = 1_000_000_000_000;

/// Degrees of reduced iterates d_n = deg(reduce(f^n)).
#[derive(Clone, Debug, Serialize)]
pub struct DegreeSequence {
    pub map_id: String,
    /// Degree index: 1 for deg(f^n), 2 when computed through the inverse.
    pub p: u8,
    /// Pairs (n, d_n), n = 1..; d_{m+n} <= d_m d_n.
    pub entries: Vec<(u32, u64)>,
    /// True when the term budget stopped the sequence early.
    pub truncated: bool,
}

/// Computes d_n = deg(reduce(f^n)) for n = 1..=n_max by repeated
/// compose-and-reduce. A term-budget overflow truncates the sequence instead
/// of failing.
pub fn degree_sequence(f: &RationalMap, n_max: u32) -> Result<DegreeSequence, CoreError> {
    if n_max < 1 {
        return Err(CoreError::Validation("n_max must be at least 1".into()));
    }
    let mut g = reduce(f)?;
    let mut entries = vec![(1u32, u64::from(g.degree))];
    let mut truncated = false;
    for n in 2..=n_max {
        match compose(f, &g).and_then(|h| reduce(&h)) {
            Ok(h) => {
                entries.push((n, u64::from(h.degree)));
                g = h;
            }
            Err(CoreError::TermBudget(_)) => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(DegreeSequence {
        map_id: f.id_string(),
        p: 1,
        entries,
        truncated,
    })
}

/// Second-degree sequence deg_2(f^n) = deg_1((f^-1)^n), available when the
/// map declares an inverse.
pub fn degree_sequence_via_inverse(
    f: &RationalMap,
    n_max: u32,
) -> Result<DegreeSequence, CoreError> {
    let inv = f.inverse.as_deref().ok_or(CoreError::MissingInverse)?;
    let mut seq = degree_sequence(inv, n_max)?;
    seq.map_id = f.id_string();
    seq.p = 2;
    Ok(seq)
}

/// Last-ratio estimate of the first dynamical degree together with the
/// certified upper bounds d_n^{1/n} (each one dominates lambda_1 by
/// submultiplicativity).
#[derive(Clone, Debug, Serialize)]
pub struct DynDegreeEstimate {
    pub estimate: f64,
    pub certified_upper: f64,
    pub upper_bounds: Vec<f64>,
    /// True when the underlying sequence was truncated by the term budget.
    pub approximate: bool,
}

/// Estimates lambda_1 from a degree sequence: the ratio d_k/d_{k-1} of the
/// last two entries, clamped into [1, min_n d_n^{1/n}]. The clamp against the
/// certified bound is decided in exact integer arithmetic so that ratios that
/// respect every bound pass through unchanged.
pub fn dyn_degree_estimate(seq: &DegreeSequence) -> Result<DynDegreeEstimate, CoreError> {
    if seq.entries.len() < 3 {
        return Err(CoreError::Validation(
            "dyn_degree_estimate needs at least 3 sequence entries".into(),
        ));
    }
    let upper_bounds: Vec<f64> = seq
        .entries
        .iter()
        .map(|&(n, d)| (d as f64).powf(1.0 / f64::from(n)))
        .collect();
    let certified_upper = upper_bounds.iter().copied().fold(f64::INFINITY, f64::min);
    let k = seq.entries.len();
    let (_, dk) = seq.entries[k - 1];
    let (_, dk1) = seq.entries[k - 2];
    // ratio r = dk/dk1 exceeds the bound d_n^{1/n} iff dk^n > d_n * dk1^n.
    let exceeds = seq.entries.iter().any(|&(n, d)| {
        num::pow(BigInt::from(dk), n as usize)
            > BigInt::from(d) * num::pow(BigInt::from(dk1), n as usize)
    });
    let ratio = if exceeds {
        certified_upper
    } else {
        dk as f64 / dk1 as f64
    };
    Ok(DynDegreeEstimate {
        estimate: ratio.max(1.0),
        certified_upper,
        upper_bounds,
        approximate: seq.truncated,
    })
}

/// Certified spectral radius of an exact rational matrix: an enclosure of the
/// maximum root modulus of the characteristic polynomial, with the largest
/// real root located separately.
#[derive(Clone, Debug)]
pub struct SpectralRadius {
    /// Midpoint of the enclosure.
    pub value: f64,
    /// Exact lower endpoint of the modulus enclosure.
    pub lo: Rat,
    /// Exact upper endpoint; hi - lo <= 1e-12.
    pub hi: Rat,
    /// Enclosure of the largest real eigenvalue, when one exists.
    pub largest_real_root: Option<(Rat, Rat)>,
    /// True when the largest real eigenvalue attains the spectral radius.
    pub dominant_real: bool,
}

impl SpectralRadius {
    pub fn lo_f64(&self) -> f64 {
        rat_to_f64(&self.lo)
    }

    pub fn hi_f64(&self) -> f64 {
        rat_to_f64(&self.hi)
    }

    pub fn largest_real_root_f64(&self) -> Option<f64> {
        self.largest_real_root
            .as_ref()
            .map(|(lo, hi)| rat_to_f64(&((lo + hi) / rat_int(2))))
    }
}

/// Computes the spectral radius of a square rational matrix through its exact
/// characteristic polynomial: all-roots-in-a-disk certificates bisected to an
/// enclosure of width <= 1e-12, plus a Sturm bisection for the largest real
/// eigenvalue.
pub fn spectral_radius(m: &RatMat) -> SpectralRadius {
    let cp = m.char_poly();
    let ip = rootcert::clear_denominators(&cp);
    let width = rat(1, ENCLOSURE_DEN);
    let (lo, hi) = rootcert::root_modulus_enclosure(&ip, &width);
    let sf = rootcert::square_free_part(&ip);
    let largest_real_root = rootcert::largest_real_root(&sf, &width);
    let dominant_real = match &largest_real_root {
        Some((_, r_hi)) => *r_hi >= lo,
        None => false,
    };
    let value = rat_to_f64(&((&lo + &hi) / rat_int(2)));
    SpectralRadius {
        value,
        lo,
        hi,
        largest_real_root,
        dominant_real,
    }
}

/// Margins of the log-concavity inequalities for (lambda_0..lambda_3).
#[derive(Clone, Debug, Serialize)]
pub struct LogConcavityReport {
    pub lambdas: [f64; 4],
    /// margins[p-1] = lambda_p^2 - lambda_{p-1} lambda_{p+1}, p = 1, 2.
    pub margins: [f64; 2],
    pub pass: bool,
}

/// Checks lambda_p^2 >= lambda_{p-1} lambda_{p+1} - tol for p = 1, 2 with
/// tol = 1e-9. Requires lambda_0 = 1 and all entries positive.
pub fn check_log_concavity(lams: &[f64; 4]) -> Result<LogConcavityReport, CoreError> {
    if (lams[0] - 1.0).abs() > 1e-12 {
        return Err(CoreError::Validation("lambda_0 must equal 1".into()));
    }
    if lams.iter().any(|l| !l.is_finite() || *l <= 0.0) {
        return Err(CoreError::Validation(
            "dynamical degrees must be positive and finite".into(),
        ));
    }
    let margins = [
        lams[1] * lams[1] - lams[0] * lams[2],
        lams[2] * lams[2] - lams[1] * lams[3],
    ];
    let pass = margins.iter().all(|m| *m >= -LOG_CONCAVITY_TOL);
    Ok(LogConcavityReport {
        lambdas: *lams,
        margins,
        pass,
    })
}

/// All four dynamical degrees of a catalog map: compound-matrix spectral
/// radii for monomial maps, H^{1,1}/H^{2,2} pullback radii for maps carrying
/// a cohomology action (topological degree 1 requires a declared inverse).
pub fn dynamical_lambdas(f: &RationalMap) -> Result<[f64; 4], CoreError> {
    if let Some(a) = &f.monomial_matrix {
        let l1 = spectral_radius(&compound_matrix(a, 1)).value;
        let l2 = spectral_radius(&compound_matrix(a, 2)).value;
        let l3 = rat_to_f64(&compound_matrix(a, 3)[(0, 0)]).abs();
        return Ok([1.0, l1, l2, l3]);
    }
    if let Some(action) = &f.action {
        if f.inverse.is_none() {
            return Err(CoreError::MissingInverse);
        }
        let l1 = spectral_radius(&action.m11).value;
        let l2 = spectral_radius(&action.m22).value;
        return Ok([1.0, l1, l2, 1.0]);
    }
    Err(CoreError::MissingAction)
}

/// One row of a stability report.
#[derive(Clone, Debug, Serialize)]
pub struct StabilityRow {
    pub n: u32,
    pub d_n: u64,
    pub d1_pow: f64,
    pub rho_pow: f64,
    /// Closed-form degree of the n-th exponent-matrix power, monomial maps only.
    pub closed_form: Option<u64>,
    /// d_n = d_1^n at this n (exact integer comparison).
    pub stable_at_n: bool,
}

/// Comparison of the reduced-iterate degrees against d_1^n and rho^n.
#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub map_id: String,
    /// Spectral radius of the pullback action (or exponent matrix).
    pub rho: f64,
    pub rows: Vec<StabilityRow>,
    /// d_n = d_1^n for every computed n.
    pub one_stable_downstairs: bool,
    /// First n with d_n < d_1^n, if any.
    pub first_drop: Option<u32>,
    pub truncated: bool,
    /// Enclosure overlap of rho(M11 pullback) and rho(H^{2,2} pushforward),
    /// when the map carries an action (the two are conjugate).
    pub rho_match_pushforward: Option<bool>,
}

/// Builds a stability report: degree sequence versus d_1^n and versus the
/// spectral radius of the declared action (or exponent matrix). Requires one
/// of the two to be present.
pub fn stability_report(f: &RationalMap, n_max: u32) -> Result<StabilityReport, CoreError> {
    if f.action.is_none() && f.monomial_matrix.is_none() {
        return Err(CoreError::MissingAction);
    }
    let seq = degree_sequence(f, n_max)?;
    let (rho, rho_match_pushforward) = if let Some(action) = &f.action {
        let r11 = spectral_radius(&action.m11);
        let r22p = spectral_radius(&action.pushforward22_matrix());
        let overlap = r11.lo <= r22p.hi && r22p.lo <= r11.hi;
        (r11.value, Some(overlap))
    } else {
        let a = f.monomial_matrix.as_ref().unwrap();
        (spectral_radius(&compound_matrix(a, 1)).value, None)
    };
    let d1 = seq.entries[0].1;
    let mut rows = Vec::with_capacity(seq.entries.len());
    let mut first_drop = None;
    for &(n, d_n) in &seq.entries {
        let closed_form = f.monomial_matrix.as_ref().map(|a| {
            let an = mat3_pow(a, n);
            u64::try_from(&monomial_degree(&an)).expect("degree fits u64")
        });
        let stable_at_n = BigInt::from(d_n) == num::pow(BigInt::from(d1), n as usize);
        if !stable_at_n && first_drop.is_none() {
            first_drop = Some(n);
        }
        rows.push(StabilityRow {
            n,
            d_n,
            d1_pow: (d1 as f64).powi(n as i32),
            rho_pow: rho.powi(n as i32),
            closed_form,
            stable_at_n,
        });
    }
    let one_stable_downstairs = rows.iter().all(|r| r.stable_at_n);
    Ok(StabilityReport {
        map_id: seq.map_id.clone(),
        rho,
        rows,
        one_stable_downstairs,
        first_drop,
        truncated: seq.truncated,
        rho_match_pushforward,
    })
}

/// CSV export with columns (n, d_n, d_n^{1/n}, rho^n, d_n = d_1^n flag).
/// Floats are printed with a fixed 12-digit format for reproducibility.
pub fn degrees_csv(seq: &DegreeSequence, rho: Option<f64>) -> String {
    let mut out = String::from("n,d_n,d_n_root,rho_power,stable_flag\n");
    let d1 = seq.entries[0].1;
    for &(n, d) in &seq.entries {
        let root = (d as f64).powf(1.0 / f64::from(n));
        let rho_pow = rho
            .map(|r| format!("{:.12}", r.powi(n as i32)))
            .unwrap_or_default();
        let stable = BigInt::from(d) == num::pow(BigInt::from(d1), n as usize);
        out.push_str(&format!("{},{},{:.12},{},{}\n", n, d, root, rho_pow, stable));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{catalog_map, cremona_catalog_entry, monomial_map, squaring_map};
    use crate::ratmat::RatMat;

    const CIRCULANT: [[i64; 3]; 3] = [[1, 1, 0], [0, 1, 1], [1, 0, 1]];

    #[test]
    fn cremona_degree_pattern() {
        let j = cremona_catalog_entry();
        let seq = degree_sequence(&j, 4).unwrap();
        assert_eq!(seq.entries, vec![(1, 3), (2, 1), (3, 3), (4, 1)]);
        assert!(!seq.truncated);
    }

    #[test]
    fn squaring_degree_pattern() {
        let seq = degree_sequence(&squaring_map(), 4).unwrap();
        assert_eq!(seq.entries, vec![(1, 2), (2, 4), (3, 8), (4, 16)]);
    }

    #[test]
    fn monomial_degrees_match_closed_form() {
        let f = monomial_map(CIRCULANT).unwrap();
        let seq = degree_sequence(&f, 6).unwrap();
        for &(n, d) in &seq.entries {
            let closed = monomial_degree(&mat3_pow(&CIRCULANT, n));
            assert_eq!(BigInt::from(d), closed, "degree mismatch at n={n}");
        }
    }

    #[test]
    fn estimates_clamp_and_pass_through() {
        let j = cremona_catalog_entry();
        let est = dyn_degree_estimate(&degree_sequence(&j, 4).unwrap()).unwrap();
        assert_eq!(est.estimate, 1.0);
        assert!(est.certified_upper <= 1.0 + 1e-12);

        let est = dyn_degree_estimate(&degree_sequence(&squaring_map(), 4).unwrap()).unwrap();
        assert_eq!(est.estimate, 2.0);

        let f = monomial_map(CIRCULANT).unwrap();
        let est = dyn_degree_estimate(&degree_sequence(&f, 12).unwrap()).unwrap();
        let rho = spectral_radius(&compound_matrix(&CIRCULANT, 1)).value;
        assert!((est.estimate - rho).abs() <= 0.02 * rho);
    }

    #[test]
    fn estimate_needs_three_entries() {
        let seq = degree_sequence(&squaring_map(), 2).unwrap();
        assert!(dyn_degree_estimate(&seq).is_err());
    }

    #[test]
    fn spectral_radius_of_involution_action() {
        let j = cremona_catalog_entry();
        let action = j.action.as_ref().unwrap();
        let sr = spectral_radius(&action.m11);
        assert!((sr.value - 1.0).abs() < 1e-11);
        assert!(sr.dominant_real);
        assert!((sr.largest_real_root_f64().unwrap() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn spectral_radius_identity_and_companion() {
        let id5 = RatMat::identity(5);
        assert!((spectral_radius(&id5).value - 1.0).abs() < 1e-11);

        let companion = RatMat::from_i64_rows(&[&[0, 1], &[1, 1]]);
        let sr = spectral_radius(&companion);
        assert!((sr.value - 1.618_033_988_749_894_8).abs() < 1e-11);
        assert!(sr.dominant_real);
    }

    #[test]
    fn spectral_radius_complex_dominant_pair() {
        // Second compound of the circulant: eigenvalues 1 ± i sqrt(3) and 1,
        // so the radius 2 is attained only by the complex pair.
        let c2 = compound_matrix(&CIRCULANT, 2);
        let sr = spectral_radius(&c2);
        assert!((sr.value - 2.0).abs() < 1e-11);
        assert!(!sr.dominant_real);
        assert!((sr.largest_real_root_f64().unwrap() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn log_concavity_catalog_cases() {
        assert!(check_log_concavity(&[1.0, 1.0, 1.0, 1.0]).unwrap().pass);
        let rep = check_log_concavity(&[1.0, 2.0, 4.0, 8.0]).unwrap();
        assert!(rep.pass);
        assert!(rep.margins.iter().all(|m| m.abs() < 1e-12));
        assert!(check_log_concavity(&[1.0, 2.0, 2.0, 2.0]).unwrap().pass);
        assert!(!check_log_concavity(&[1.0, 1.0, 2.0, 1.0]).unwrap().pass);
        assert!(check_log_concavity(&[2.0, 1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn lambdas_of_catalog_maps() {
        let f = monomial_map(CIRCULANT).unwrap();
        let lams = dynamical_lambdas(&f).unwrap();
        assert!((lams[1] - 2.0).abs() < 1e-9);
        assert!((lams[2] - 2.0).abs() < 1e-9);
        assert!((lams[3] - 2.0).abs() < 1e-12);

        let j = cremona_catalog_entry();
        let lams = dynamical_lambdas(&j).unwrap();
        for l in lams {
            assert!((l - 1.0).abs() < 1e-9);
        }

        let sq = squaring_map();
        let lams = dynamical_lambdas(&sq).unwrap();
        assert_eq!(lams[3], 8.0);
    }

    #[test]
    fn stability_reports() {
        let j = cremona_catalog_entry();
        let rep = stability_report(&j, 4).unwrap();
        assert!(!rep.one_stable_downstairs);
        assert_eq!(rep.first_drop, Some(2));
        assert_eq!(rep.rho_match_pushforward, Some(true));
        assert!((rep.rho - 1.0).abs() < 1e-11);

        let rep = stability_report(&squaring_map(), 4).unwrap();
        assert!(rep.one_stable_downstairs);
        assert_eq!(rep.first_drop, None);
        for row in &rep.rows {
            assert_eq!(row.closed_form, Some(row.d_n));
        }
    }

    #[test]
    fn inverse_sequence_of_involution() {
        let j = cremona_catalog_entry();
        let seq = degree_sequence_via_inverse(&j, 4).unwrap();
        assert_eq!(seq.p, 2);
        assert_eq!(seq.entries, vec![(1, 3), (2, 1), (3, 3), (4, 1)]);
    }

    #[test]
    fn csv_rows_for_cremona() {
        let j = catalog_map("cremona_j").unwrap();
        let seq = degree_sequence(&j, 4).unwrap();
        let csv = degrees_csv(&seq, Some(1.0));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,d_n,d_n_root,rho_power,stable_flag");
        assert!(lines[1].starts_with("1,3,"));
        assert!(lines[2].starts_with("2,1,"));
        assert!(lines[3].starts_with("3,3,"));
        assert!(lines[4].starts_with("4,1,"));
        assert!(lines[1].ends_with("true"));
        assert!(lines[2].ends_with("false"));
    }
}
