//! Rational self-maps of P³: exact representation, composition, reduction,
//! point evaluation, and a catalog of maps with known cohomology actions on
//! the blowup of P³ at four points.

use num::bigint::BigInt;
use num::complex::Complex64;
use num::{One, Zero};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::cohomology::{make_blowup_space, BlowupSpace, Class11, Class22};
use crate::poly::{Exps, Poly, TermJson, N_VARS, TERM_BUDGET};
use crate::ratmat::RatMat;
use crate::rational::{format_rat, parse_rat, Rat};
use crate::CoreError;

/// Relative threshold below which all components are considered to vanish.
pub const INDETERMINACY_TAU: f64 = 1e-12;

/// Catalog knowledge about a map.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapFlags {
    pub is_pseudo_automorphism: bool,
    pub is_1_stable_downstairs: bool,
}

/// Whether the stored matrices act as pullback or pushforward.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionDirection {
    Pullback,
    Pushforward,
}

/// Exact action on the cohomology of a blowup space: M11 on H^{1,1} and M22
/// on H^{2,2} (both in the stored direction), plus the exceptional curve
/// classes e_1..e_N.
#[derive(Clone, Debug)]
pub struct CohAction {
    pub space: Arc<BlowupSpace>,
    pub m11: RatMat,
    pub m22: RatMat,
    pub exceptional_curves: Vec<Class22>,
    pub direction: ActionDirection,
}

impl CohAction {
    pub fn new(
        space: Arc<BlowupSpace>,
        m11: RatMat,
        m22: RatMat,
        direction: ActionDirection,
    ) -> Result<Self, CoreError> {
        if m11.dim() != space.dim() || m22.dim() != space.dim() {
            return Err(CoreError::Shape(format!(
                "action matrices must be {0}x{0} on a blowup at {1} points",
                space.dim(),
                space.n_points()
            )));
        }
        let exceptional_curves = (1..=space.n_points())
            .map(|i| space.basis22_class(i))
            .collect();
        Ok(CohAction {
            space,
            m11,
            m22,
            exceptional_curves,
            direction,
        })
    }

    /// Applies M11 to an H^{1,1} class.
    pub fn apply11(&self, a: &Class11) -> Result<Class11, CoreError> {
        self.space.class11(self.m11.mul_vec(&a.coeffs))
    }

    /// Applies M22 to an H^{2,2} class.
    pub fn apply22(&self, c: &Class22) -> Result<Class22, CoreError> {
        self.space.class22(self.m22.mul_vec(&c.coeffs))
    }

    /// Adjoint of `m` under the intersection pairing: P·mᵀ·P with P the
    /// diagonal pairing matrix. The adjoint of a pullback on one side of the
    /// pairing is the pushforward on the other side (projection formula).
    fn pairing_adjoint(&self, m: &RatMat) -> RatMat {
        let p = RatMat::diag(self.space.pairing_diag());
        p.mul(&m.transpose()).mul(&p)
    }

    /// Pushforward on H^{1,1}, derived from M22 by the projection formula.
    pub fn pushforward11_matrix(&self) -> RatMat {
        self.pairing_adjoint(&self.m22)
    }

    /// Pushforward on H^{2,2}, derived from M11 by the projection formula.
    pub fn pushforward22_matrix(&self) -> RatMat {
        self.pairing_adjoint(&self.m11)
    }
}

/// Solves the pairing-invariance condition pair(M11·θ, M22·η) = pair(θ, η)
/// for M22 given an invertible M11: M22 = P·(M11⁻¹)ᵀ·P.
pub fn derive_m22_from_pairing(
    space: &Arc<BlowupSpace>,
    m11: &RatMat,
) -> Result<RatMat, CoreError> {
    let inv = m11.inverse().ok_or(CoreError::SingularMatrix)?;
    let p = RatMat::diag(space.pairing_diag());
    Ok(p.mul(&inv.transpose()).mul(&p))
}

/// Rational self-map of P³: four homogeneous integer polynomials of a common
/// degree, with optional catalog metadata. `compose` yields unreduced maps;
/// `reduce` restores the no-common-factor form.
#[derive(Clone, Debug)]
pub struct RationalMap {
    pub components: [Poly; N_VARS],
    pub degree: u32,
    pub name: Option<String>,
    pub inverse: Option<Box<RationalMap>>,
    pub action: Option<CohAction>,
    pub flags: MapFlags,
    /// Exponent matrix when the map is the homogenization of a torus map.
    pub monomial_matrix: Option<[[i64; 3]; 3]>,
}

/// Result of evaluating a map at a projective point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EvalResult {
    /// Image point, normalized so the max-modulus coordinate is exactly 1.
    Point([Complex64; N_VARS]),
    /// All components vanished below the relative threshold.
    Indeterminate,
}

impl RationalMap {
    /// Validates homogeneity of a common degree and rejects the zero map.
    /// Does not require reduced form; `reduce` establishes it.
    pub fn new(components: [Poly; N_VARS]) -> Result<Self, CoreError> {
        if components.iter().all(Poly::is_zero) {
            return Err(CoreError::ZeroMap);
        }
        let mut degree = None;
        for (i, c) in components.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let d = c.homogeneous_degree().ok_or_else(|| {
                CoreError::Validation(format!("components[{i}] is not homogeneous"))
            })?;
            match degree {
                None => degree = Some(d),
                Some(prev) if prev != d => {
                    return Err(CoreError::Validation(format!(
                        "components[{i}] has degree {d}, expected {prev}"
                    )))
                }
                _ => {}
            }
        }
        Ok(RationalMap {
            components,
            degree: degree.expect("nonzero map has a degree"),
            name: None,
            inverse: None,
            action: None,
            flags: MapFlags::default(),
            monomial_matrix: None,
        })
    }

    pub fn identity() -> Self {
        let mut m = RationalMap::new([Poly::var(0), Poly::var(1), Poly::var(2), Poly::var(3)])
            .expect("identity is valid");
        m.name = Some("identity".into());
        m.flags.is_pseudo_automorphism = true;
        m.flags.is_1_stable_downstairs = true;
        m.monomial_matrix = Some([[1, 0, 0], [0, 1, 0], [0, 0, 1]]);
        m
    }

    pub fn id_string(&self) -> String {
        self.name.clone().unwrap_or_else(|| "anonymous".into())
    }

    /// True when the four components share no non-unit polynomial factor.
    pub fn is_reduced(&self) -> bool {
        component_gcd(&self.components).total_degree() == Some(0)
    }
}

fn component_gcd(components: &[Poly; N_VARS]) -> Poly {
    let mut g = Poly::zero();
    for c in components {
        g = g.gcd(c);
        if g.total_degree() == Some(0) {
            break;
        }
    }
    g
}

/// Substitutes `g` into `f`. The result is NOT reduced; its degree is
/// deg(f)·deg(g). Metadata is dropped.
pub fn compose(f: &RationalMap, g: &RationalMap) -> Result<RationalMap, CoreError> {
    let mut components: [Poly; N_VARS] =
        [Poly::zero(), Poly::zero(), Poly::zero(), Poly::zero()];
    for (i, c) in f.components.iter().enumerate() {
        components[i] = c.try_compose(&g.components, TERM_BUDGET)?;
    }
    let mut out = RationalMap::new(components)?;
    debug_assert_eq!(out.degree, f.degree * g.degree);
    out.degree = f.degree * g.degree;
    Ok(out)
}

/// Divides all components by their polynomial gcd. Preserves metadata (the
/// map is unchanged as a rational map); rejects the zero map.
pub fn reduce(f: &RationalMap) -> Result<RationalMap, CoreError> {
    if f.components.iter().all(Poly::is_zero) {
        return Err(CoreError::ZeroMap);
    }
    let g = component_gcd(&f.components);
    let mut out = f.clone();
    if g.total_degree() != Some(0) {
        for c in &mut out.components {
            *c = c.div_exact(&g).expect("gcd divides every component");
        }
    } else if !g.leading().map(|(_, c)| c.is_one()).unwrap_or(true) {
        // Remove the integer content as well so reduced maps are canonical.
        let content = g.leading().expect("nonzero gcd").1.clone();
        for c in &mut out.components {
            *c = c.div_content(&content);
        }
    }
    out.degree = out
        .components
        .iter()
        .find(|c| !c.is_zero())
        .and_then(Poly::homogeneous_degree)
        .expect("reduced map has a degree");
    Ok(out)
}

/// Evaluates at a projective point, normalizing the max-modulus coordinate
/// to exactly 1. Returns `Indeterminate` when every component falls below
/// `INDETERMINACY_TAU · scale^degree` with scale = max input modulus.
pub fn evaluate(f: &RationalMap, x: &[Complex64; N_VARS]) -> Result<EvalResult, CoreError> {
    let scale = x.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return Err(CoreError::ZeroPoint);
    }
    let mut image = [Complex64::new(0.0, 0.0); N_VARS];
    for (i, c) in f.components.iter().enumerate() {
        image[i] = c.eval_complex(x);
    }
    let m = image.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    if m < INDETERMINACY_TAU * scale.powi(f.degree as i32) {
        return Ok(EvalResult::Indeterminate);
    }
    let lead = image
        .iter()
        .position(|c| c.norm() == m)
        .expect("max modulus is attained");
    let pivot = image[lead];
    for c in &mut image {
        *c /= pivot;
    }
    Ok(EvalResult::Point(image))
}

/// Evaluates in the affine chart x0 = 1: z -> F(1,z) dehomogenized. `None`
/// when the point is indeterminate or maps into the hyperplane at infinity.
pub fn evaluate_chart(f: &RationalMap, z: &[Complex64; 3]) -> Option<[Complex64; 3]> {
    let x = [Complex64::new(1.0, 0.0), z[0], z[1], z[2]];
    match evaluate(f, &x) {
        Ok(EvalResult::Point(y)) => {
            let denom = y[0];
            if denom.norm() < INDETERMINACY_TAU {
                return None;
            }
            Some([y[1] / denom, y[2] / denom, y[3] / denom])
        }
        _ => None,
    }
}

fn monomial(exps: Exps) -> Poly {
    Poly::monomial(BigInt::one(), exps)
}

/// The Cremona involution J = [x1x2x3 : x0x2x3 : x0x1x3 : x0x1x2] with its
/// frozen cohomology action on the blowup of P³ at the four coordinate
/// points. M11 sends H to 3H - 2·sum(E_i) and E_i to H - sum_{j != i} E_j;
/// M22 was derived once from pairing invariance and is frozen here (a
/// regression test re-derives it).
pub fn cremona_catalog_entry() -> RationalMap {
    let components = [
        monomial([0, 1, 1, 1]),
        monomial([1, 0, 1, 1]),
        monomial([1, 1, 0, 1]),
        monomial([1, 1, 1, 0]),
    ];
    let space = make_blowup_space(4);
    let m11 = RatMat::from_i64_rows(&[
        &[3, 1, 1, 1, 1],
        &[-2, 0, -1, -1, -1],
        &[-2, -1, 0, -1, -1],
        &[-2, -1, -1, 0, -1],
        &[-2, -1, -1, -1, 0],
    ]);
    let m22 = RatMat::from_i64_rows(&[
        &[3, 2, 2, 2, 2],
        &[-1, 0, -1, -1, -1],
        &[-1, -1, 0, -1, -1],
        &[-1, -1, -1, 0, -1],
        &[-1, -1, -1, -1, 0],
    ]);
    let action = CohAction::new(Arc::clone(&space), m11, m22, ActionDirection::Pullback)
        .expect("catalog action is well-formed");

    let mut inverse = RationalMap::new(components.clone()).expect("catalog map is valid");
    inverse.name = Some("cremona_j".into());
    inverse.flags = MapFlags {
        is_pseudo_automorphism: true,
        is_1_stable_downstairs: false,
    };
    inverse.action = Some(action.clone());
    inverse.monomial_matrix = Some([[-1, 0, 0], [0, -1, 0], [0, 0, -1]]);

    let mut map = inverse.clone();
    map.inverse = Some(Box::new(inverse));
    map
}

/// The squaring map [x0² : x1² : x2² : x3²] (homogenization of the torus
/// map with exponent matrix 2·I).
pub fn squaring_map() -> RationalMap {
    let mut m = monomial_map([[2, 0, 0], [0, 2, 0], [0, 0, 2]]).expect("2I is nonsingular");
    m.name = Some("squaring".into());
    m.flags.is_1_stable_downstairs = true;
    m
}

/// Homogenization of the torus map x_i -> prod_j x_j^{A_ij} (rows of `a`
/// give the exponents of the three affine coordinates). Rejects singular
/// exponent matrices. Stores `a` for closed-form degree and dynamical-degree
/// oracles.
pub fn monomial_map(a: [[i64; 3]; 3]) -> Result<RationalMap, CoreError> {
    let det = det3(&a);
    if det == 0 {
        return Err(CoreError::SingularMatrix);
    }
    let big: Vec<Vec<BigInt>> = a
        .iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    let (delta, nu) = homogenization_exponents(&big);
    let delta = u32::try_from(&delta).expect("small exponent");
    let nu: Vec<u32> = nu.iter().map(|v| u32::try_from(v).expect("small exponent")).collect();

    let mut comp0 = [0u32; N_VARS];
    comp0[0] = delta;
    for j in 0..3 {
        comp0[j + 1] = nu[j];
    }
    let mut components = [
        monomial(comp0),
        Poly::zero(),
        Poly::zero(),
        Poly::zero(),
    ];
    for i in 0..3 {
        let s: i64 = a[i].iter().sum();
        let mut e = [0u32; N_VARS];
        e[0] = u32::try_from(delta as i64 - s).expect("delta dominates row sums");
        for j in 0..3 {
            e[j + 1] = u32::try_from(a[i][j] + nu[j] as i64).expect("nu clears negatives");
        }
        components[i + 1] = monomial(e);
    }
    let mut map = RationalMap::new(components)?;
    map.monomial_matrix = Some(a);
    Ok(map)
}

fn det3(a: &[[i64; 3]; 3]) -> i128 {
    let a = |i: usize, j: usize| a[i][j] as i128;
    a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
        - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
        + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
}

/// Clearing exponents of the homogenization: delta = max(0, max row sum) on
/// x0 and nu_j = max(0, max_i(-A_ij)) on x_j.
fn homogenization_exponents(a: &[Vec<BigInt>]) -> (BigInt, Vec<BigInt>) {
    let row_sums: Vec<BigInt> = a.iter().map(|r| r.iter().sum()).collect();
    let delta = row_sums
        .iter()
        .cloned()
        .max()
        .unwrap_or_else(BigInt::zero)
        .max(BigInt::zero());
    let nu = (0..3)
        .map(|j| {
            a.iter()
                .map(|r| -&r[j])
                .max()
                .unwrap_or_else(BigInt::zero)
                .max(BigInt::zero())
        })
        .collect();
    (delta, nu)
}

/// Homogenization degree of the torus map with exponent matrix `a`:
/// delta + sum of the nu_j.
pub fn monomial_degree(a: &[Vec<BigInt>]) -> BigInt {
    let (delta, nu) = homogenization_exponents(a);
    delta + nu.into_iter().sum::<BigInt>()
}

/// Exact n-th power of a 3x3 integer matrix.
pub fn mat3_pow(a: &[[i64; 3]; 3], n: u32) -> Vec<Vec<BigInt>> {
    let mut out: Vec<Vec<BigInt>> = (0..3)
        .map(|i| (0..3).map(|j| BigInt::from((i == j) as i64)).collect())
        .collect();
    let base: Vec<Vec<BigInt>> = a
        .iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    for _ in 0..n {
        let mut next = vec![vec![BigInt::zero(); 3]; 3];
        for i in 0..3 {
            for k in 0..3 {
                if out[i][k].is_zero() {
                    continue;
                }
                for j in 0..3 {
                    let v = &out[i][k] * &base[k][j];
                    next[i][j] += v;
                }
            }
        }
        out = next;
    }
    out
}

/// The p-th compound (exterior power) matrix of a 3x3 integer matrix, as an
/// exact rational matrix. p = 1 returns `a` itself; p = 2 the 3x3 matrix of
/// 2x2 minors (rows/columns ordered (0,1), (0,2), (1,2)); p = 3 the 1x1
/// determinant.
pub fn compound_matrix(a: &[[i64; 3]; 3], p: usize) -> RatMat {
    let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
    match p {
        1 => RatMat::from_i64_rows(&[&a[0], &a[1], &a[2]]),
        2 => {
            let minor = |rp: (usize, usize), cp: (usize, usize)| -> i64 {
                a[rp.0][cp.0] * a[rp.1][cp.1] - a[rp.0][cp.1] * a[rp.1][cp.0]
            };
            let rows: Vec<Vec<i64>> = pairs
                .iter()
                .map(|&rp| pairs.iter().map(|&cp| minor(rp, cp)).collect())
                .collect();
            RatMat::from_i64_rows(&[&rows[0], &rows[1], &rows[2]])
        }
        3 => {
            let d = Rat::from_integer(BigInt::from(det3(a)));
            RatMat::from_rows(vec![vec![d]]).expect("1x1 is square")
        }
        _ => panic!("compound matrices are defined for p = 1, 2, 3"),
    }
}

/// One built-in map with a short description.
pub struct CatalogEntry {
    pub name: &'static str,
    pub summary: &'static str,
    pub map: RationalMap,
}

/// Built-in maps: the Cremona involution, the squaring map, and two
/// monomial templates.
pub fn catalog() -> Vec<CatalogEntry> {
    let mut circulant =
        monomial_map([[1, 1, 0], [0, 1, 1], [1, 0, 1]]).expect("circulant is nonsingular");
    circulant.name = Some("monomial_circulant".into());
    circulant.flags.is_1_stable_downstairs = true;

    let mut rotation =
        monomial_map([[0, 1, 0], [0, 0, 1], [1, 0, 0]]).expect("permutation is nonsingular");
    rotation.name = Some("monomial_rotation".into());
    rotation.flags = MapFlags {
        is_pseudo_automorphism: true,
        is_1_stable_downstairs: true,
    };
    let mut rotation_inv =
        monomial_map([[0, 0, 1], [1, 0, 0], [0, 1, 0]]).expect("permutation is nonsingular");
    rotation_inv.name = Some("monomial_rotation_inverse".into());
    rotation.inverse = Some(Box::new(rotation_inv));

    vec![
        CatalogEntry {
            name: "cremona_j",
            summary: "degree-3 involution [x1x2x3 : x0x2x3 : x0x1x3 : x0x1x2] with its action on the blowup at the four coordinate points",
            map: cremona_catalog_entry(),
        },
        CatalogEntry {
            name: "squaring",
            summary: "holomorphic squaring map [x0^2 : x1^2 : x2^2 : x3^2]",
            map: squaring_map(),
        },
        CatalogEntry {
            name: "monomial_circulant",
            summary: "monomial map of the circulant exponent matrix [[1,1,0],[0,1,1],[1,0,1]]",
            map: circulant,
        },
        CatalogEntry {
            name: "monomial_rotation",
            summary: "coordinate rotation, the monomial map of the cyclic permutation matrix",
            map: rotation,
        },
    ]
}

/// Looks up a built-in map by name.
pub fn catalog_map(name: &str) -> Option<RationalMap> {
    catalog().into_iter().find(|e| e.name == name).map(|e| e.map)
}

// ---------------------------------------------------------------------------
// JSON map definition format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ActionJson {
    #[serde(rename = "M11")]
    m11: Vec<Vec<String>>,
    #[serde(rename = "M22")]
    m22: Vec<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct MapJson {
    vars: usize,
    components: Vec<Vec<TermJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    inverse: Option<Box<MapJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    action: Option<ActionJson>,
    flags: MapFlags,
    #[serde(skip_serializing_if = "Option::is_none")]
    monomial_matrix: Option<[[i64; 3]; 3]>,
}

fn ratmat_to_strings(m: &RatMat) -> Vec<Vec<String>> {
    (0..m.dim())
        .map(|i| m.row(i).iter().map(format_rat).collect())
        .collect()
}

fn ratmat_from_strings(rows: &[Vec<String>], field: &str) -> Result<RatMat, CoreError> {
    let parsed: Result<Vec<Vec<Rat>>, CoreError> = rows
        .iter()
        .map(|r| r.iter().map(|s| parse_rat(s)).collect())
        .collect();
    RatMat::from_rows(parsed.map_err(|e| CoreError::Validation(format!("{field}: {e}")))?)
        .map_err(|e| CoreError::Validation(format!("{field}: {e}")))
}

impl RationalMap {
    fn to_map_json(&self) -> MapJson {
        MapJson {
            vars: N_VARS,
            components: self.components.iter().map(Poly::to_terms_json).collect(),
            inverse: self.inverse.as_ref().map(|f| Box::new(f.to_map_json())),
            action: self.action.as_ref().map(|a| ActionJson {
                m11: ratmat_to_strings(&a.m11),
                m22: ratmat_to_strings(&a.m22),
            }),
            flags: self.flags,
            monomial_matrix: self.monomial_matrix,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.to_map_json()).expect("map serialization cannot fail")
    }

    fn from_map_json(js: MapJson, name: Option<String>) -> Result<RationalMap, CoreError> {
        if js.vars != N_VARS {
            return Err(CoreError::Validation(format!(
                "vars: expected {N_VARS}, got {}",
                js.vars
            )));
        }
        if js.components.len() != N_VARS {
            return Err(CoreError::Validation(format!(
                "components: expected {N_VARS} entries, got {}",
                js.components.len()
            )));
        }
        let mut components: [Poly; N_VARS] =
            [Poly::zero(), Poly::zero(), Poly::zero(), Poly::zero()];
        for (i, terms) in js.components.iter().enumerate() {
            components[i] = Poly::from_terms_json(terms)
                .map_err(|e| CoreError::Validation(format!("components[{i}]: {e}")))?;
        }
        let mut map = RationalMap::new(components)
            .map_err(|e| CoreError::Validation(format!("components: {e}")))?;
        if !map.is_reduced() {
            return Err(CoreError::Validation(
                "components: share a common non-unit polynomial factor (map must be reduced)"
                    .into(),
            ));
        }
        map.name = name;
        map.flags = js.flags;
        map.monomial_matrix = js.monomial_matrix;
        if let Some(inv) = js.inverse {
            map.inverse = Some(Box::new(RationalMap::from_map_json(*inv, None)?));
        }
        if let Some(action) = js.action {
            let m11 = ratmat_from_strings(&action.m11, "action.M11")?;
            let m22 = ratmat_from_strings(&action.m22, "action.M22")?;
            if m11.dim() == 0 || m11.dim() != m22.dim() {
                return Err(CoreError::Validation(
                    "action: M11 and M22 must be square of equal nonzero dimension".into(),
                ));
            }
            let space = make_blowup_space(m11.dim() - 1);
            map.action = Some(CohAction::new(
                space,
                m11,
                m22,
                ActionDirection::Pullback,
            )?);
        }
        Ok(map)
    }

    pub fn from_json(v: &serde_json::Value, name: Option<String>) -> Result<RationalMap, CoreError> {
        let js: MapJson = serde_json::from_value(v.clone())
            .map_err(|e| CoreError::Validation(format!("map file: {e}")))?;
        RationalMap::from_map_json(js, name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohomology::pair;
    use crate::rational::rat_int;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn cremona_composes_to_identity() {
        let j = cremona_catalog_entry();
        let jj = compose(&j, &j).unwrap();
        assert_eq!(jj.degree, 9);
        // Common factor (x0 x1 x2 x3)^2.
        let red = reduce(&jj).unwrap();
        assert_eq!(red.degree, 1);
        for (i, comp) in red.components.iter().enumerate() {
            assert_eq!(comp, &Poly::var(i));
        }
    }

    #[test]
    fn identity_law_and_monomial_square() {
        let f = cremona_catalog_entry();
        let id = RationalMap::identity();
        let fi = compose(&id, &f).unwrap();
        assert_eq!(fi.components, f.components);
        let sq = squaring_map();
        let s2 = compose(&sq, &sq).unwrap();
        assert!(s2.is_reduced());
        assert_eq!(s2.degree, 4);
    }

    #[test]
    fn reduce_strips_monomial_factor() {
        // (x0^2 x1, x0 x1^2, x0 x1 x2, x0 x1 x3) -> (x0, x1, x2, x3).
        let f = RationalMap::new([
            Poly::monomial(BigInt::from(1), [2, 1, 0, 0]),
            Poly::monomial(BigInt::from(1), [1, 2, 0, 0]),
            Poly::monomial(BigInt::from(1), [1, 1, 1, 0]),
            Poly::monomial(BigInt::from(1), [1, 1, 0, 1]),
        ])
        .unwrap();
        let red = reduce(&f).unwrap();
        assert_eq!(red.degree, 1);
        assert_eq!(red.components[2], Poly::var(2));
    }

    #[test]
    fn evaluate_cremona_points() {
        let j = cremona_catalog_entry();
        match evaluate(&j, &[c(1.0), c(1.0), c(1.0), c(1.0)]).unwrap() {
            EvalResult::Point(p) => {
                for v in p {
                    assert!((v - c(1.0)).norm() < 1e-14);
                }
            }
            _ => panic!("fixed point expected"),
        }
        assert_eq!(
            evaluate(&j, &[c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap(),
            EvalResult::Indeterminate
        );
        // J[1:2:1:1] = [2:1:2:2] normalized to [1:1/2:1:1].
        match evaluate(&j, &[c(1.0), c(2.0), c(1.0), c(1.0)]).unwrap() {
            EvalResult::Point(p) => {
                assert!((p[0] - c(1.0)).norm() < 1e-14);
                assert!((p[1] - c(0.5)).norm() < 1e-14);
            }
            _ => panic!("point expected"),
        }
        assert!(matches!(
            evaluate(&j, &[c(0.0); 4]),
            Err(CoreError::ZeroPoint)
        ));
    }

    #[test]
    fn evaluate_respects_scaling() {
        let j = cremona_catalog_entry();
        let x = [c(0.3), c(-1.2), c(0.7), c(2.1)];
        let lx = [x[0] * 3.5, x[1] * 3.5, x[2] * 3.5, x[3] * 3.5];
        let (EvalResult::Point(a), EvalResult::Point(b)) =
            (evaluate(&j, &x).unwrap(), evaluate(&j, &lx).unwrap())
        else {
            panic!("points expected");
        };
        for i in 0..4 {
            assert!((a[i] - b[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn frozen_m22_matches_pairing_derivation() {
        let j = cremona_catalog_entry();
        let action = j.action.as_ref().unwrap();
        let derived = derive_m22_from_pairing(&action.space, &action.m11).unwrap();
        assert_eq!(derived, action.m22);
    }

    #[test]
    fn cremona_action_moves_a_line_to_minus_a_line() {
        let j = cremona_catalog_entry();
        let action = j.action.as_ref().unwrap();
        let c34 = action.space.line_through(3, 4).unwrap();
        let image = action.apply22(&c34).unwrap();
        let expect = action.space.line_through(1, 2).unwrap().neg();
        assert!(image.eq_exact(&expect));
        // The negative pairing of the pulled-back ample class against the line.
        let omega = action
            .space
            .class11(vec![rat_int(3), rat_int(-1), rat_int(-1), rat_int(-1), rat_int(-1)])
            .unwrap();
        let pulled = action.apply11(&omega).unwrap();
        assert!(pair(&pulled, &c34).unwrap() < rat_int(0));
    }

    #[test]
    fn monomial_map_construction() {
        let id = monomial_map([[1, 0, 0], [0, 1, 0], [0, 0, 1]]).unwrap();
        assert_eq!(id.degree, 1);
        for (i, c) in id.components.iter().enumerate() {
            assert_eq!(c, &Poly::var(i));
        }
        let circulant = monomial_map([[1, 1, 0], [0, 1, 1], [1, 0, 1]]).unwrap();
        assert_eq!(circulant.degree, 2);
        let rotation = monomial_map([[0, 1, 0], [0, 0, 1], [1, 0, 0]]).unwrap();
        assert_eq!(rotation.degree, 1);
        assert!(matches!(
            monomial_map([[1, 1, 0], [1, 1, 0], [0, 0, 1]]),
            Err(CoreError::SingularMatrix)
        ));
        // The reciprocal map -I homogenizes to the Cremona involution.
        let recip = monomial_map([[-1, 0, 0], [0, -1, 0], [0, 0, -1]]).unwrap();
        assert_eq!(recip.components, cremona_catalog_entry().components);
    }

    #[test]
    fn monomial_composition_is_matrix_product() {
        let a = [[1, 1, 0], [0, 1, 1], [1, 0, 1]];
        let b = [[2, 0, 0], [0, 2, 0], [0, 0, 2]];
        let fa = monomial_map(a).unwrap();
        let fb = monomial_map(b).unwrap();
        let ab = [[2, 2, 0], [0, 2, 2], [2, 0, 2]];
        let composed = reduce(&compose(&fa, &fb).unwrap()).unwrap();
        assert_eq!(composed.components, monomial_map(ab).unwrap().components);
    }

    #[test]
    fn map_json_round_trip() {
        let j = cremona_catalog_entry();
        let v = j.to_json();
        let back = RationalMap::from_json(&v, Some("cremona_j".into())).unwrap();
        assert_eq!(back.components, j.components);
        assert_eq!(back.flags, j.flags);
        assert!(back.inverse.is_some());
        let action = back.action.unwrap();
        assert_eq!(action.m11, j.action.as_ref().unwrap().m11);
        assert_eq!(action.m22, j.action.as_ref().unwrap().m22);
    }

    #[test]
    fn map_json_rejects_unreduced() {
        let f = RationalMap::new([
            Poly::monomial(BigInt::from(1), [2, 0, 0, 0]),
            Poly::monomial(BigInt::from(1), [1, 1, 0, 0]),
            Poly::monomial(BigInt::from(1), [1, 0, 1, 0]),
            Poly::monomial(BigInt::from(1), [1, 0, 0, 1]),
        ])
        .unwrap();
        let v = f.to_json();
        let err = RationalMap::from_json(&v, None).unwrap_err();
        assert!(err.to_string().contains("components"));
    }

    #[test]
    fn compound_matrices() {
        let a = [[1, 1, 0], [0, 1, 1], [1, 0, 1]];
        let c2 = compound_matrix(&a, 2);
        // det of compound_2 = det(A)^2 = 4.
        let c3 = compound_matrix(&a, 3);
        assert_eq!(c3[(0, 0)], rat_int(2));
        assert_eq!(c2.dim(), 3);
    }
}
