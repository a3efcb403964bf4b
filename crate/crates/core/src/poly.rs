//! Multivariate integer polynomials in the four homogeneous coordinates of P³.
//!
//! Supports the composition/reduction pipeline for rational maps: budgeted
//! multiplication and substitution, exact division, and a multivariate gcd
//! (monomial fast path, then integer content extraction, then subresultant
//! pseudo-remainder sequences in a chosen main variable).

use num::bigint::BigInt;
use num::complex::Complex64;
use num::{Integer, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

use crate::CoreError;

/// Number of homogeneous coordinates.
pub const N_VARS: usize = 4;

/// Exponent vector of one monomial, indexed by variable.
pub type Exps = [u32; N_VARS];

/// Default cap on the number of monomials any intermediate polynomial may
/// hold during composition pipelines.
pub const TERM_BUDGET: usize = 200_000;

/// Sparse polynomial with arbitrary-precision integer coefficients.
/// Invariant: no stored coefficient is zero.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Exps, BigInt>,
}

/// One monomial in the JSON term form.
#[derive(Serialize, Deserialize)]
pub struct TermJson {
    pub coeff: String,
    pub exps: Exps,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::monomial(BigInt::one(), [0; N_VARS])
    }

    /// The single variable `x_i`.
    pub fn var(i: usize) -> Self {
        let mut e = [0; N_VARS];
        e[i] = 1;
        Poly::monomial(BigInt::one(), e)
    }

    pub fn monomial(coeff: BigInt, exps: Exps) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exps, coeff);
        }
        Poly { terms }
    }

    pub fn constant(c: i64) -> Self {
        Poly::monomial(BigInt::from(c), [0; N_VARS])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exps, &BigInt)> {
        self.terms.iter()
    }

    /// Largest monomial in lexicographic order, with its coefficient.
    pub fn leading(&self) -> Option<(&Exps, &BigInt)> {
        self.terms.iter().next_back()
    }

    /// Total degree, or `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
    }

    /// Common total degree if every monomial has the same one.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    pub fn add_term(&mut self, exps: Exps, coeff: &BigInt) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(exps).or_insert_with(BigInt::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&exps);
        }
    }

    pub fn add(&self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(*e, c);
        }
        out
    }

    pub fn sub(&self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(*e, &(-c));
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }

    pub fn scale(&self, c: &BigInt) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(e, k)| (*e, k * c)).collect(),
        }
    }

    /// Product with a term-count guard; the guard bounds the result and every
    /// intermediate accumulation state.
    pub fn try_mul(&self, rhs: &Poly, budget: usize) -> Result<Poly, CoreError> {
        let mut out = Poly::zero();
        for (ea, ca) in self.terms() {
            for (eb, cb) in rhs.terms() {
                let mut e = [0u32; N_VARS];
                for i in 0..N_VARS {
                    e[i] = ea[i]
                        .checked_add(eb[i])
                        .ok_or_else(|| CoreError::TermBudget(budget))?;
                }
                out.add_term(e, &(ca * cb));
            }
            if out.n_terms() > budget {
                return Err(CoreError::TermBudget(budget));
            }
        }
        Ok(out)
    }

    pub fn mul(&self, rhs: &Poly) -> Poly {
        self.try_mul(rhs, usize::MAX).expect("unbudgeted product")
    }

    pub fn try_pow(&self, n: u32, budget: usize) -> Result<Poly, CoreError> {
        let mut out = Poly::one();
        for _ in 0..n {
            out = out.try_mul(self, budget)?;
        }
        Ok(out)
    }

    /// Substitutes `subs[i]` for variable `i`.
    pub fn try_compose(&self, subs: &[Poly; N_VARS], budget: usize) -> Result<Poly, CoreError> {
        // Cache powers of each substituted component up to the largest
        // exponent that actually occurs.
        let mut max_e = [0u32; N_VARS];
        for e in self.terms.keys() {
            for i in 0..N_VARS {
                max_e[i] = max_e[i].max(e[i]);
            }
        }
        let mut powers: Vec<Vec<Poly>> = Vec::with_capacity(N_VARS);
        for i in 0..N_VARS {
            let mut p = Vec::with_capacity(max_e[i] as usize + 1);
            p.push(Poly::one());
            for k in 1..=max_e[i] as usize {
                let next = p[k - 1].try_mul(&subs[i], budget)?;
                p.push(next);
            }
            powers.push(p);
        }
        let mut out = Poly::zero();
        for (e, c) in self.terms() {
            let mut prod = Poly::monomial(c.clone(), [0; N_VARS]);
            for i in 0..N_VARS {
                if e[i] > 0 {
                    prod = prod.try_mul(&powers[i][e[i] as usize], budget)?;
                }
            }
            out = out.add(&prod);
            if out.n_terms() > budget {
                return Err(CoreError::TermBudget(budget));
            }
        }
        Ok(out)
    }

    pub fn partial_derivative(&self, var: usize) -> Poly {
        let mut out = Poly::zero();
        for (e, c) in self.terms() {
            if e[var] == 0 {
                continue;
            }
            let mut d = *e;
            d[var] -= 1;
            out.add_term(d, &(c * BigInt::from(e[var])));
        }
        out
    }

    /// Evaluates at a complex point. Coefficients are converted to f64.
    pub fn eval_complex(&self, x: &[Complex64; N_VARS]) -> Complex64 {
        let mut max_e = [0u32; N_VARS];
        for e in self.terms.keys() {
            for i in 0..N_VARS {
                max_e[i] = max_e[i].max(e[i]);
            }
        }
        let mut powers: Vec<Vec<Complex64>> = Vec::with_capacity(N_VARS);
        for i in 0..N_VARS {
            let mut p = Vec::with_capacity(max_e[i] as usize + 1);
            p.push(Complex64::new(1.0, 0.0));
            for k in 1..=max_e[i] as usize {
                let v = p[k - 1] * x[i];
                p.push(v);
            }
            powers.push(p);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in self.terms() {
            let mut t = Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0);
            for i in 0..N_VARS {
                t *= powers[i][e[i] as usize];
            }
            acc += t;
        }
        acc
    }

    /// Positive gcd of all coefficients; zero for the zero polynomial.
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in self.terms.values() {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Coordinatewise minimum exponent over all monomials.
    pub fn min_exps(&self) -> Exps {
        let mut m = [u32::MAX; N_VARS];
        for e in self.terms.keys() {
            for i in 0..N_VARS {
                m[i] = m[i].min(e[i]);
            }
        }
        if self.is_zero() {
            [0; N_VARS]
        } else {
            m
        }
    }

    /// Divides every monomial by `x^shift`; all exponents must cover `shift`.
    pub fn shift_down(&self, shift: Exps) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut d = [0u32; N_VARS];
                    for i in 0..N_VARS {
                        assert!(e[i] >= shift[i], "monomial shift below zero");
                        d[i] = e[i] - shift[i];
                    }
                    (d, c.clone())
                })
                .collect(),
        }
    }

    /// Divides all coefficients by `c` exactly; `c` must divide the content.
    pub fn div_content(&self, c: &BigInt) -> Poly {
        assert!(!c.is_zero());
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(e, k)| {
                    let (q, r) = k.div_rem(c);
                    assert!(r.is_zero(), "content division must be exact");
                    (*e, q)
                })
                .collect(),
        }
    }

    /// Exact multivariate division; `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        let (de, dc) = d.leading().expect("nonzero divisor");
        let de = *de;
        let dc = dc.clone();
        let mut rem = self.clone();
        let mut out = Poly::zero();
        while let Some((re, rc)) = rem.leading() {
            let mut qe = [0u32; N_VARS];
            for i in 0..N_VARS {
                if re[i] < de[i] {
                    return None;
                }
                qe[i] = re[i] - de[i];
            }
            let (qc, r) = rc.div_rem(&dc);
            if !r.is_zero() {
                return None;
            }
            let qterm = Poly::monomial(qc, qe);
            rem = rem.sub(&qterm.mul(d));
            out = out.add(&qterm);
        }
        Some(out)
    }

    /// Flips the sign so the lex-leading coefficient is positive.
    fn sign_normalized(self) -> Poly {
        match self.leading() {
            Some((_, c)) if c.is_negative() => self.neg(),
            _ => self,
        }
    }

    /// Multivariate gcd, sign-normalized so the lex-leading coefficient is
    /// positive. gcd(0, 0) = 0.
    pub fn gcd(&self, other: &Poly) -> Poly {
        if self.is_zero() {
            return other.clone().sign_normalized();
        }
        if other.is_zero() {
            return self.clone().sign_normalized();
        }

        // Monomial fast path: pull out the common monomial factor first.
        let ma = self.min_exps();
        let mb = other.min_exps();
        let mut shared = [0u32; N_VARS];
        for i in 0..N_VARS {
            shared[i] = ma[i].min(mb[i]);
        }
        let a = self.shift_down(ma);
        let b = other.shift_down(mb);

        let ca = a.content();
        let cb = b.content();
        let c = ca.gcd(&cb);
        let a = a.div_content(&ca);
        let b = b.div_content(&cb);

        let core = if a.n_terms() == 1 || b.n_terms() == 1 {
            // A primitive monomial with zero min-exponents is a unit.
            Poly::one()
        } else {
            gcd_primitive(&a, &b)
        };
        Poly::monomial(c, shared).mul(&core).sign_normalized()
    }

    pub fn to_terms_json(&self) -> Vec<TermJson> {
        // Leading (lex-largest) term first.
        self.terms
            .iter()
            .rev()
            .map(|(e, c)| TermJson {
                coeff: c.to_string(),
                exps: *e,
            })
            .collect()
    }

    pub fn from_terms_json(terms: &[TermJson]) -> Result<Poly, CoreError> {
        let mut out = Poly::zero();
        for t in terms {
            let c: BigInt = t
                .coeff
                .parse()
                .map_err(|_| CoreError::Parse(format!("not an integer: {:?}", t.coeff)))?;
            out.add_term(t.exps, &c);
        }
        Ok(out)
    }
}

/// Variables actually occurring in `p`.
fn used_vars(p: &Poly) -> [bool; N_VARS] {
    let mut used = [false; N_VARS];
    for e in p.terms.keys() {
        for i in 0..N_VARS {
            used[i] |= e[i] > 0;
        }
    }
    used
}

/// gcd of two primitive (integer content 1, zero min-exponents) polynomials.
fn gcd_primitive(a: &Poly, b: &Poly) -> Poly {
    if a == b {
        return a.clone();
    }
    let ua = used_vars(a);
    let ub = used_vars(b);
    let main = match (0..N_VARS).find(|&i| ua[i] && ub[i]) {
        Some(v) => v,
        // Disjoint variable sets and trivial contents: the gcd is a unit.
        None => return Poly::one(),
    };

    let mut u = UniPoly::from_poly(a, main);
    let mut v = UniPoly::from_poly(b, main);
    if u.deg() < v.deg() {
        std::mem::swap(&mut u, &mut v);
    }

    let cont_u = u.content();
    let cont_v = v.content();
    let gamma = cont_u.gcd(&cont_v);
    let mut u = u.div_poly(&cont_u);
    let mut v = v.div_poly(&cont_v);

    // Subresultant polynomial remainder sequence on the primitive parts.
    let mut g = Poly::one();
    let mut h = Poly::one();
    let pp_gcd = loop {
        let d = u.deg() - v.deg();
        let r = u.prem(&v);
        if r.is_zero() {
            break v.primitive_part();
        }
        if r.deg() == 0 {
            break UniPoly::constant(Poly::one());
        }
        let divisor = g.mul(&pow_poly(&h, d));
        u = v;
        v = r.div_poly(&divisor);
        g = u.lc().clone();
        h = match d {
            0 => h,
            1 => g.clone(),
            _ => pow_poly(&g, d)
                .div_exact(&pow_poly(&h, d - 1))
                .expect("subresultant h update divides exactly"),
        };
    };
    gamma.mul(&pp_gcd.to_poly(main))
}

fn pow_poly(p: &Poly, n: usize) -> Poly {
    let mut out = Poly::one();
    for _ in 0..n {
        out = out.mul(p);
    }
    out
}

/// Polynomial in one distinguished variable with `Poly` coefficients that do
/// not involve that variable. Coefficients ascend by power; trailing zero
/// coefficients are trimmed.
struct UniPoly {
    coeffs: Vec<Poly>,
}

impl UniPoly {
    fn from_poly(p: &Poly, var: usize) -> UniPoly {
        let deg = p.terms.keys().map(|e| e[var]).max().unwrap_or(0) as usize;
        let mut coeffs = vec![Poly::zero(); deg + 1];
        for (e, c) in p.terms() {
            let mut rest = *e;
            let k = rest[var] as usize;
            rest[var] = 0;
            coeffs[k].add_term(rest, c);
        }
        let mut u = UniPoly { coeffs };
        u.trim();
        u
    }

    fn to_poly(&self, var: usize) -> Poly {
        let mut out = Poly::zero();
        for (k, c) in self.coeffs.iter().enumerate() {
            for (e, v) in c.terms() {
                let mut exps = *e;
                exps[var] += k as u32;
                out.add_term(exps, v);
            }
        }
        out
    }

    fn constant(p: Poly) -> UniPoly {
        let mut u = UniPoly { coeffs: vec![p] };
        u.trim();
        u
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if c.is_zero()) {
            self.coeffs.pop();
        }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn deg(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn lc(&self) -> &Poly {
        self.coeffs.last().expect("nonzero polynomial")
    }

    /// gcd of all coefficients (a polynomial in the remaining variables).
    fn content(&self) -> Poly {
        let mut g = Poly::zero();
        for c in &self.coeffs {
            g = g.gcd(c);
        }
        g
    }

    fn primitive_part(&self) -> UniPoly {
        if self.is_zero() {
            return UniPoly { coeffs: vec![] };
        }
        self.div_poly(&self.content())
    }

    /// Divides every coefficient exactly by `d`.
    fn div_poly(&self, d: &Poly) -> UniPoly {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                if c.is_zero() {
                    Poly::zero()
                } else {
                    c.div_exact(d).expect("coefficient division must be exact")
                }
            })
            .collect();
        let mut u = UniPoly { coeffs };
        u.trim();
        u
    }

    fn scale(&self, s: &Poly) -> UniPoly {
        let mut u = UniPoly {
            coeffs: self.coeffs.iter().map(|c| c.mul(s)).collect(),
        };
        u.trim();
        u
    }

    fn sub(&self, rhs: &UniPoly) -> UniPoly {
        let mut coeffs = vec![Poly::zero(); self.coeffs.len().max(rhs.coeffs.len())];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs[k] = coeffs[k].add(c);
        }
        for (k, c) in rhs.coeffs.iter().enumerate() {
            coeffs[k] = coeffs[k].sub(c);
        }
        let mut u = UniPoly { coeffs };
        u.trim();
        u
    }

    /// Shifts by `x^k` and scales by `s`.
    fn shift_scale(&self, k: usize, s: &Poly) -> UniPoly {
        let mut coeffs = vec![Poly::zero(); k];
        coeffs.extend(self.coeffs.iter().map(|c| c.mul(s)));
        let mut u = UniPoly { coeffs };
        u.trim();
        u
    }

    /// Pseudo-remainder: `lc(v)^(deg u - deg v + 1) * u  mod  v`.
    fn prem(&self, v: &UniPoly) -> UniPoly {
        let m = v.deg();
        let lv = v.lc().clone();
        let mut r = UniPoly {
            coeffs: self.coeffs.clone(),
        };
        let mut e = self.deg() as i64 - m as i64 + 1;
        while !r.is_zero() && r.deg() >= m {
            let s = v.shift_scale(r.deg() - m, r.lc());
            r = r.scale(&lv).sub(&s);
            e -= 1;
        }
        for _ in 0..e.max(0) {
            r = r.scale(&lv);
        }
        r
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*x{i}")?,
                    _ => write!(f, "*x{i}^{k}")?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(terms: &[(i64, Exps)]) -> Poly {
        let mut out = Poly::zero();
        for (c, e) in terms {
            out.add_term(*e, &BigInt::from(*c));
        }
        out
    }

    #[test]
    fn arithmetic_basics() {
        let a = p(&[(1, [1, 0, 0, 0]), (1, [0, 1, 0, 0])]); // x0 + x1
        let b = a.mul(&a);
        assert_eq!(
            b,
            p(&[(1, [2, 0, 0, 0]), (2, [1, 1, 0, 0]), (1, [0, 2, 0, 0])])
        );
        assert_eq!(b.homogeneous_degree(), Some(2));
        assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn compose_substitutes_components() {
        // f = x0*x1 composed with (x2, x3, ..) = x2*x3
        let f = p(&[(1, [1, 1, 0, 0])]);
        let subs = [Poly::var(2), Poly::var(3), Poly::var(0), Poly::var(1)];
        let g = f.try_compose(&subs, TERM_BUDGET).unwrap();
        assert_eq!(g, p(&[(1, [0, 0, 1, 1])]));
    }

    #[test]
    fn budget_guard_trips() {
        // (x0 + x1 + x2 + x3)^2 has 10 terms.
        let s = Poly::var(0)
            .add(&Poly::var(1))
            .add(&Poly::var(2))
            .add(&Poly::var(3));
        assert!(s.try_mul(&s, 4).is_err());
        assert!(s.try_mul(&s, 10).is_ok());
    }

    #[test]
    fn gcd_monomial_fast_path() {
        let a = p(&[(6, [3, 2, 2, 2])]);
        let b = p(&[(4, [2, 3, 2, 2])]);
        assert_eq!(a.gcd(&b), p(&[(2, [2, 2, 2, 2])]));
    }

    #[test]
    fn gcd_with_zero_and_sign() {
        let a = p(&[(-2, [1, 0, 0, 0])]);
        assert_eq!(Poly::zero().gcd(&a), p(&[(2, [1, 0, 0, 0])]));
        assert_eq!(a.gcd(&Poly::zero()), p(&[(2, [1, 0, 0, 0])]));
    }

    #[test]
    fn gcd_multivariate_common_factor() {
        // (x0 + x1) is the gcd of (x0+x1)*(x0+x2) and (x0+x1)*(x1+x3).
        let f = p(&[(1, [1, 0, 0, 0]), (1, [0, 1, 0, 0])]);
        let a = f.mul(&p(&[(1, [1, 0, 0, 0]), (1, [0, 0, 1, 0])]));
        let b = f.mul(&p(&[(1, [0, 1, 0, 0]), (1, [0, 0, 0, 1])]));
        assert_eq!(a.gcd(&b), f);
    }

    #[test]
    fn gcd_coprime_is_unit() {
        let a = p(&[(1, [1, 0, 0, 0]), (1, [0, 1, 0, 0])]); // x0 + x1
        let b = p(&[(1, [1, 0, 0, 0]), (-1, [0, 1, 0, 0])]); // x0 - x1
        assert_eq!(a.gcd(&b), Poly::one());
    }

    #[test]
    fn gcd_nontrivial_contents() {
        // 6*(x0+x1) vs 4*(x0+x1)*x2: gcd 2*(x0+x1).
        let f = p(&[(1, [1, 0, 0, 0]), (1, [0, 1, 0, 0])]);
        let a = f.scale(&BigInt::from(6));
        let b = f.mul(&Poly::var(2)).scale(&BigInt::from(4));
        assert_eq!(a.gcd(&b), f.scale(&BigInt::from(2)));
    }

    #[test]
    fn div_exact_round_trip() {
        let f = p(&[(3, [2, 1, 0, 0]), (-1, [0, 0, 1, 1]), (7, [0, 0, 0, 0])]);
        let g = p(&[(2, [1, 1, 1, 0]), (5, [0, 0, 0, 2])]);
        let prod = f.mul(&g);
        assert_eq!(prod.div_exact(&g).unwrap(), f);
        assert_eq!(prod.div_exact(&f).unwrap(), g);
        let h = p(&[(1, [1, 0, 0, 0]), (1, [0, 0, 0, 1])]);
        assert!(prod.add(&Poly::one()).div_exact(&h).is_none());
    }

    #[test]
    fn derivative_and_eval() {
        let f = p(&[(1, [3, 0, 0, 0]), (2, [0, 2, 0, 0])]); // x0^3 + 2 x1^2
        assert_eq!(
            f.partial_derivative(0),
            p(&[(3, [2, 0, 0, 0])])
        );
        let x = [
            Complex64::new(2.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        let v = f.eval_complex(&x); // 8 + 2*(i^2) = 6
        assert!((v - Complex64::new(6.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn terms_json_round_trip() {
        let f = p(&[(-3, [2, 1, 0, 0]), (1, [0, 0, 1, 1])]);
        let js = f.to_terms_json();
        assert_eq!(js[0].coeff, "-3"); // leading term first
        assert_eq!(Poly::from_terms_json(&js).unwrap(), f);
    }
}
