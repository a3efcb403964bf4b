//! Exact intersection theory on the blowup of P³ at N points: the
//! H^{1,1} and H^{2,2} bases, cup products, and the intersection pairing.
//!
//! Basis conventions: H^{1,1} = (H, E_1..E_N) with H the hyperplane pullback
//! and E_i exceptional divisor classes; H^{2,2} = (h, e_1..e_N) with h the
//! line class and e_i the class of a line inside E_i. Cup rules: H·H = h,
//! E_i·E_i = -e_i, H·E_i = 0, E_i·E_j = 0 (i != j). Pairing: <H,h> = 1,
//! <E_i,e_i> = -1, all other basis pairings 0. The strict transform of the
//! line through the i-th and j-th blown-up points is h - e_i - e_j.

use num::{One, Signed, Zero};
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use std::fmt;
use std::sync::Arc;

use crate::rational::{format_rat, parse_rat, Rat};
use crate::CoreError;

/// Blowup of P³ at `n_points` distinct points: bases, cup tensor, pairing.
/// All tensors are canonical functions of `n_points`; values are immutable.
#[derive(Clone, Debug)]
pub struct BlowupSpace {
    n_points: usize,
    basis11: Vec<String>,
    basis22: Vec<String>,
    /// cup_tensor[i][j] = coefficients of basis11[i] · basis11[j] in basis22.
    cup_tensor: Vec<Vec<Vec<Rat>>>,
    /// Diagonal of the H^{1,1} x H^{2,2} intersection pairing.
    pairing_diag: Vec<Rat>,
}

/// Exact class in H^{1,1}, coefficients ordered by `basis11`.
#[derive(Clone)]
pub struct Class11 {
    pub space: Arc<BlowupSpace>,
    pub coeffs: Vec<Rat>,
}

/// Exact class in H^{2,2}, coefficients ordered by `basis22`.
#[derive(Clone)]
pub struct Class22 {
    pub space: Arc<BlowupSpace>,
    pub coeffs: Vec<Rat>,
}

/// Builds the blowup space of P³ at `n_points` points.
pub fn make_blowup_space(n_points: usize) -> Arc<BlowupSpace> {
    let dim = n_points + 1;
    let mut basis11 = vec!["H".to_string()];
    let mut basis22 = vec!["h".to_string()];
    for i in 1..=n_points {
        basis11.push(format!("E{i}"));
        basis22.push(format!("e{i}"));
    }
    let mut cup_tensor = vec![vec![vec![Rat::zero(); dim]; dim]; dim];
    // H·H = h; E_i·E_i = -e_i; all mixed products vanish.
    cup_tensor[0][0][0] = Rat::one();
    for i in 1..dim {
        cup_tensor[i][i][i] = -Rat::one();
    }
    let mut pairing_diag = vec![-Rat::one(); dim];
    pairing_diag[0] = Rat::one();
    Arc::new(BlowupSpace {
        n_points,
        basis11,
        basis22,
        cup_tensor,
        pairing_diag,
    })
}

impl BlowupSpace {
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Dimension of H^{1,1} and H^{2,2}: n_points + 1.
    pub fn dim(&self) -> usize {
        self.n_points + 1
    }

    pub fn basis11(&self) -> &[String] {
        &self.basis11
    }

    pub fn basis22(&self) -> &[String] {
        &self.basis22
    }

    /// Diagonal entries of the intersection pairing matrix.
    pub fn pairing_diag(&self) -> &[Rat] {
        &self.pairing_diag
    }

    /// Entry of the cup tensor: basis11[i] · basis11[j] in basis22.
    pub fn cup_entry(&self, i: usize, j: usize) -> &[Rat] {
        &self.cup_tensor[i][j]
    }

    pub fn class11(self: &Arc<Self>, coeffs: Vec<Rat>) -> Result<Class11, CoreError> {
        if coeffs.len() != self.dim() {
            return Err(CoreError::Shape(format!(
                "class coefficient vector has length {}, basis has length {}",
                coeffs.len(),
                self.dim()
            )));
        }
        Ok(Class11 {
            space: Arc::clone(self),
            coeffs,
        })
    }

    pub fn class22(self: &Arc<Self>, coeffs: Vec<Rat>) -> Result<Class22, CoreError> {
        if coeffs.len() != self.dim() {
            return Err(CoreError::Shape(format!(
                "class coefficient vector has length {}, basis has length {}",
                coeffs.len(),
                self.dim()
            )));
        }
        Ok(Class22 {
            space: Arc::clone(self),
            coeffs,
        })
    }

    /// Basis class of H^{1,1}: index 0 is H, index i >= 1 is E_i.
    pub fn basis11_class(self: &Arc<Self>, i: usize) -> Class11 {
        let mut coeffs = vec![Rat::zero(); self.dim()];
        coeffs[i] = Rat::one();
        Class11 {
            space: Arc::clone(self),
            coeffs,
        }
    }

    /// Basis class of H^{2,2}: index 0 is h, index i >= 1 is e_i.
    pub fn basis22_class(self: &Arc<Self>, i: usize) -> Class22 {
        let mut coeffs = vec![Rat::zero(); self.dim()];
        coeffs[i] = Rat::one();
        Class22 {
            space: Arc::clone(self),
            coeffs,
        }
    }

    /// The hyperplane class H.
    pub fn hyperplane(self: &Arc<Self>) -> Class11 {
        self.basis11_class(0)
    }

    /// The line class h.
    pub fn line(self: &Arc<Self>) -> Class22 {
        self.basis22_class(0)
    }

    /// Strict transform of the line through blown-up points i and j:
    /// h - e_i - e_j (1-based indices).
    pub fn line_through(self: &Arc<Self>, i: usize, j: usize) -> Result<Class22, CoreError> {
        if i == 0 || j == 0 || i > self.n_points || j > self.n_points || i == j {
            return Err(CoreError::Shape(format!(
                "line through points {i}, {j} undefined on a blowup at {} points",
                self.n_points
            )));
        }
        let mut coeffs = vec![Rat::zero(); self.dim()];
        coeffs[0] = Rat::one();
        coeffs[i] = -Rat::one();
        coeffs[j] = -Rat::one();
        Ok(Class22 {
            space: Arc::clone(self),
            coeffs,
        })
    }

    fn check_same(&self, other: &BlowupSpace) -> Result<(), CoreError> {
        if self.n_points != other.n_points {
            return Err(CoreError::MismatchedSpaces(self.n_points, other.n_points));
        }
        Ok(())
    }
}

/// Cup product H^{1,1} x H^{1,1} -> H^{2,2}; bilinear and symmetric.
pub fn cup11(a: &Class11, b: &Class11) -> Result<Class22, CoreError> {
    a.space.check_same(&b.space)?;
    let dim = a.space.dim();
    let mut coeffs = vec![Rat::zero(); dim];
    for i in 0..dim {
        if a.coeffs[i].is_zero() {
            continue;
        }
        for j in 0..dim {
            if b.coeffs[j].is_zero() {
                continue;
            }
            let f = &a.coeffs[i] * &b.coeffs[j];
            for (k, t) in a.space.cup_tensor[i][j].iter().enumerate() {
                if !t.is_zero() {
                    coeffs[k] += t * &f;
                }
            }
        }
    }
    Ok(Class22 {
        space: Arc::clone(&a.space),
        coeffs,
    })
}

/// Intersection pairing <a, c> = coeffs(a)^T · diag(pairing) · coeffs(c).
pub fn pair(a: &Class11, c: &Class22) -> Result<Rat, CoreError> {
    a.space.check_same(&c.space)?;
    Ok(a.coeffs
        .iter()
        .zip(&c.coeffs)
        .zip(a.space.pairing_diag())
        .fold(Rat::zero(), |acc, ((x, y), p)| acc + x * y * p))
}

/// Triple intersection number: pair(a, cup11(b, c)); fully symmetric.
pub fn triple(a: &Class11, b: &Class11, c: &Class11) -> Result<Rat, CoreError> {
    pair(a, &cup11(b, c)?)
}

impl Class11 {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn add(&self, rhs: &Class11) -> Result<Class11, CoreError> {
        self.space.check_same(&rhs.space)?;
        Ok(Class11 {
            space: Arc::clone(&self.space),
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn scale(&self, c: &Rat) -> Class11 {
        Class11 {
            space: Arc::clone(&self.space),
            coeffs: self.coeffs.iter().map(|v| v * c).collect(),
        }
    }

    /// Exact equality of coefficient vectors over the same space.
    pub fn eq_exact(&self, rhs: &Class11) -> bool {
        self.space.n_points == rhs.space.n_points && self.coeffs == rhs.coeffs
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        coeffs_to_json(&self.coeffs)
    }

    pub fn from_json_value(
        space: &Arc<BlowupSpace>,
        v: &serde_json::Value,
    ) -> Result<Class11, CoreError> {
        space.class11(coeffs_from_json(v)?)
    }
}

impl Class22 {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// True when every coefficient is within `tol` of zero (exact compare).
    pub fn is_zero_within(&self, tol: f64) -> bool {
        let t = Rat::from_float(tol).expect("finite tolerance");
        self.coeffs.iter().all(|c| c.abs() <= t)
    }

    pub fn add(&self, rhs: &Class22) -> Result<Class22, CoreError> {
        self.space.check_same(&rhs.space)?;
        Ok(Class22 {
            space: Arc::clone(&self.space),
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn scale(&self, c: &Rat) -> Class22 {
        Class22 {
            space: Arc::clone(&self.space),
            coeffs: self.coeffs.iter().map(|v| v * c).collect(),
        }
    }

    pub fn neg(&self) -> Class22 {
        self.scale(&-Rat::one())
    }

    pub fn eq_exact(&self, rhs: &Class22) -> bool {
        self.space.n_points == rhs.space.n_points && self.coeffs == rhs.coeffs
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        coeffs_to_json(&self.coeffs)
    }

    pub fn from_json_value(
        space: &Arc<BlowupSpace>,
        v: &serde_json::Value,
    ) -> Result<Class22, CoreError> {
        space.class22(coeffs_from_json(v)?)
    }
}

fn coeffs_to_json(coeffs: &[Rat]) -> serde_json::Value {
    serde_json::Value::Array(
        coeffs
            .iter()
            .map(|c| serde_json::Value::String(format_rat(c)))
            .collect(),
    )
}

fn coeffs_from_json(v: &serde_json::Value) -> Result<Vec<Rat>, CoreError> {
    let arr = v
        .as_array()
        .ok_or_else(|| CoreError::Parse("class must be an array of rational strings".into()))?;
    arr.iter()
        .map(|x| {
            x.as_str()
                .ok_or_else(|| CoreError::Parse("class entries must be strings".into()))
                .and_then(parse_rat)
        })
        .collect()
}

impl Serialize for BlowupSpace {
    /// Only `n_points` is serialized; the tensors are canonical.
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("BlowupSpace", 1)?;
        st.serialize_field("n_points", &self.n_points)?;
        st.end()
    }
}

impl Serialize for Class11 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.coeffs.len()))?;
        for c in &self.coeffs {
            seq.serialize_element(&format_rat(c))?;
        }
        seq.end()
    }
}

impl Serialize for Class22 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.coeffs.len()))?;
        for c in &self.coeffs {
            seq.serialize_element(&format_rat(c))?;
        }
        seq.end()
    }
}

fn fmt_class(f: &mut fmt::Formatter<'_>, labels: &[String], coeffs: &[Rat]) -> fmt::Result {
    let mut first = true;
    for (l, c) in labels.iter().zip(coeffs) {
        if c.is_zero() {
            continue;
        }
        if !first {
            write!(f, " + ")?;
        }
        first = false;
        if c.is_one() {
            write!(f, "{l}")?;
        } else {
            write!(f, "{c}·{l}")?;
        }
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

impl fmt::Debug for Class11 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_class(f, self.space.basis11(), &self.coeffs)
    }
}

impl fmt::Debug for Class22 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_class(f, self.space.basis22(), &self.coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat_int;

    #[test]
    fn plain_p3() {
        let s = make_blowup_space(0);
        assert_eq!(s.dim(), 1);
        let hh = cup11(&s.hyperplane(), &s.hyperplane()).unwrap();
        assert!(hh.eq_exact(&s.line()));
        assert_eq!(pair(&s.hyperplane(), &s.line()).unwrap(), rat_int(1));
    }

    #[test]
    fn cup_rules_at_four_points() {
        let s = make_blowup_space(4);
        let e1 = s.basis11_class(1);
        let e2 = s.basis11_class(2);
        assert!(cup11(&e1, &e1).unwrap().eq_exact(&s.basis22_class(1).neg()));
        assert!(cup11(&e1, &e2).unwrap().is_zero());
        assert!(cup11(&s.hyperplane(), &e1).unwrap().is_zero());
        // (H + E_1)·(H - E_1) = h + e_1.
        let a = s.hyperplane().add(&e1).unwrap();
        let b = s.hyperplane().add(&e1.scale(&rat_int(-1))).unwrap();
        let expect = s.basis22_class(0).add(&s.basis22_class(1)).unwrap();
        assert!(cup11(&a, &b).unwrap().eq_exact(&expect));
    }

    #[test]
    fn pairing_values() {
        let s = make_blowup_space(4);
        assert_eq!(pair(&s.basis11_class(2), &s.basis22_class(2)).unwrap(), rat_int(-1));
        assert_eq!(pair(&s.basis11_class(3), &s.basis22_class(3)).unwrap(), rat_int(-1));
        // (3H - 2*sum E_i) paired with h - e_3 - e_4 is -1.
        let omega = s
            .class11(vec![rat_int(3), rat_int(-2), rat_int(-2), rat_int(-2), rat_int(-2)])
            .unwrap();
        let c = s.line_through(3, 4).unwrap();
        assert_eq!(pair(&omega, &c).unwrap(), rat_int(-1));
    }

    #[test]
    fn triple_products() {
        let s = make_blowup_space(4);
        let h = s.hyperplane();
        let e1 = s.basis11_class(1);
        assert_eq!(triple(&h, &h, &h).unwrap(), rat_int(1));
        assert_eq!(triple(&e1, &e1, &e1).unwrap(), rat_int(1));
        assert_eq!(triple(&h, &h, &e1).unwrap(), rat_int(0));
    }

    #[test]
    fn mismatched_spaces_rejected() {
        let s4 = make_blowup_space(4);
        let s3 = make_blowup_space(3);
        assert!(cup11(&s4.hyperplane(), &s3.hyperplane()).is_err());
        assert!(pair(&s4.hyperplane(), &s3.line()).is_err());
    }

    #[test]
    fn class_json_round_trip() {
        let s = make_blowup_space(2);
        let a = s
            .class11(vec![rat_int(3), crate::rational::rat(-1, 2), rat_int(0)])
            .unwrap();
        let v = a.to_json_value();
        assert_eq!(v, serde_json::json!(["3/1", "-1/2", "0/1"]));
        let back = Class11::from_json_value(&s, &v).unwrap();
        assert!(back.eq_exact(&a));
        assert_eq!(
            serde_json::to_string(&*s).unwrap(),
            "{\"n_points\":2}"
        );
    }
}
