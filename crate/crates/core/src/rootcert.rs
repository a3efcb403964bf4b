//! Certified root localization for integer polynomials: Sturm sequences for
//! real roots, and an exact all-roots-in-a-disk test obtained by mapping the
//! disk of radius c to the left half-plane and running the Routh criterion
//! in rational arithmetic. Both are exact; bisection drives them to any
//! requested enclosure width.

use num::bigint::BigInt;
use num::{Integer, One, Signed, Zero};

use crate::poly::Poly;
use crate::rational::Rat;

/// Clears denominators: returns integer coefficients of a scalar multiple.
pub(crate) fn clear_denominators(coeffs: &[Rat]) -> Vec<BigInt> {
    let lcm = coeffs
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    coeffs
        .iter()
        .map(|c| c.numer() * (&lcm / c.denom()))
        .collect()
}

fn trim(mut p: Vec<BigInt>) -> Vec<BigInt> {
    while matches!(p.last(), Some(c) if c.is_zero()) {
        p.pop();
    }
    p
}

pub(crate) fn degree(p: &[BigInt]) -> usize {
    p.len().saturating_sub(1)
}

/// Horner evaluation at an exact rational point.
pub(crate) fn eval_rat(p: &[BigInt], x: &Rat) -> Rat {
    let mut acc = Rat::zero();
    for c in p.iter().rev() {
        acc = acc * x + Rat::from_integer(c.clone());
    }
    acc
}

pub(crate) fn derivative(p: &[BigInt]) -> Vec<BigInt> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * BigInt::from(k))
        .collect()
}

fn to_uni_poly(p: &[BigInt]) -> Poly {
    let mut out = Poly::zero();
    for (k, c) in p.iter().enumerate() {
        out.add_term([k as u32, 0, 0, 0], c);
    }
    out
}

fn from_uni_poly(p: &Poly) -> Vec<BigInt> {
    let deg = p
        .terms()
        .map(|(e, _)| e[0] as usize)
        .max()
        .unwrap_or(0);
    let mut out = vec![BigInt::zero(); deg + 1];
    for (e, c) in p.terms() {
        out[e[0] as usize] = c.clone();
    }
    trim(out)
}

/// Square-free part p / gcd(p, p'), primitive and sign-normalized.
pub(crate) fn square_free_part(p: &[BigInt]) -> Vec<BigInt> {
    let p = trim(p.to_vec());
    if degree(&p) <= 1 {
        return p;
    }
    let up = to_uni_poly(&p);
    let g = up.gcd(&to_uni_poly(&derivative(&p)));
    let sf = up.div_exact(&g).expect("gcd divides the polynomial");
    from_uni_poly(&sf)
}

/// Cauchy root bound: 1 + max |a_k| / |a_n|; every root modulus is below it.
pub(crate) fn cauchy_bound(p: &[BigInt]) -> Rat {
    let lead = p.last().expect("nonzero polynomial").abs();
    let max = p
        .iter()
        .take(p.len() - 1)
        .map(Signed::abs)
        .max()
        .unwrap_or_else(BigInt::zero);
    Rat::one() + Rat::new(max, lead)
}

/// Sturm chain of a square-free polynomial, over rationals.
pub(crate) fn sturm_chain(p: &[BigInt]) -> Vec<Vec<Rat>> {
    let to_rat = |q: &[BigInt]| -> Vec<Rat> {
        q.iter().map(|c| Rat::from_integer(c.clone())).collect()
    };
    let mut chain = vec![to_rat(p), to_rat(&derivative(p))];
    loop {
        let b = chain.last().unwrap();
        if b.is_empty() {
            chain.pop();
            break;
        }
        if b.len() == 1 {
            break;
        }
        let a = &chain[chain.len() - 2];
        let r = neg_rem(a, b);
        if r.is_empty() {
            break;
        }
        chain.push(r);
    }
    chain
}

/// -(a mod b) over rationals, trimmed.
fn neg_rem(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut r = a.to_vec();
    let lb = b.last().unwrap().clone();
    while r.len() >= b.len() && !r.is_empty() {
        let lr = r.last().unwrap().clone();
        if lr.is_zero() {
            r.pop();
            continue;
        }
        let shift = r.len() - b.len();
        let q = lr / lb.clone();
        for (k, c) in b.iter().enumerate() {
            let v = &q * c;
            r[shift + k] -= v;
        }
        // The leading term cancels exactly.
        debug_assert!(r.last().unwrap().is_zero());
        r.pop();
    }
    while matches!(r.last(), Some(c) if c.is_zero()) {
        r.pop();
    }
    r.iter().map(|c| -c).collect()
}

fn sign_variations(chain: &[Vec<Rat>], x: &Rat) -> usize {
    let mut last = 0i8;
    let mut changes = 0usize;
    for q in chain {
        let mut acc = Rat::zero();
        for c in q.iter().rev() {
            acc = acc * x + c;
        }
        let s = if acc.is_zero() {
            0
        } else if acc.is_negative() {
            -1
        } else {
            1
        };
        if s != 0 {
            if last != 0 && s != last {
                changes += 1;
            }
            last = s;
        }
    }
    changes
}

/// Number of distinct real roots of the square-free polynomial in (a, b].
pub(crate) fn count_roots_in(chain: &[Vec<Rat>], a: &Rat, b: &Rat) -> usize {
    sign_variations(chain, a).saturating_sub(sign_variations(chain, b))
}

/// Enclosure (lo, hi] of the largest real root of a square-free polynomial,
/// bisected to `width`; `None` when there is no real root.
pub(crate) fn largest_real_root(p_sf: &[BigInt], width: &Rat) -> Option<(Rat, Rat)> {
    if degree(p_sf) == 0 {
        return None;
    }
    let chain = sturm_chain(p_sf);
    let bound = cauchy_bound(p_sf);
    let mut lo = -bound.clone();
    let mut hi = bound.clone();
    // Invariant: at least one root in (lo, hi], none in (hi, bound].
    if count_roots_in(&chain, &lo, &hi) == 0 {
        return None;
    }
    let two = Rat::from_integer(BigInt::from(2));
    while (&hi - &lo) > *width {
        let mid = (&lo + &hi) / &two;
        if count_roots_in(&chain, &mid, &bound) >= 1 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((lo, hi))
}

/// Number of roots of `p` with modulus strictly above `c`, certified by the
/// Routh table of the half-plane transform. `None` when a root sits on the
/// circle of radius `c` (boundary case) or the table degenerates.
pub(crate) fn count_outside_disk(p: &[BigInt], c: &Rat) -> Option<usize> {
    let p = trim(p.to_vec());
    let n = degree(&p);
    if n == 0 {
        return Some(0);
    }
    // P(z) = p(c z).
    let mut scaled: Vec<Rat> = Vec::with_capacity(n + 1);
    let mut ck = Rat::one();
    for coeff in &p {
        scaled.push(Rat::from_integer(coeff.clone()) * &ck);
        ck *= c;
    }
    // Q(s) = sum_k A_k (1+s)^k (1-s)^(n-k): maps |z| < c to Re s < 0.
    let mut q = vec![Rat::zero(); n + 1];
    let plus = binomial_powers(n, false);
    let minus = binomial_powers(n, true);
    for (k, a) in scaled.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        // (1+s)^k * (1-s)^(n-k)
        for (i, pi) in plus[k].iter().enumerate() {
            for (j, mj) in minus[n - k].iter().enumerate() {
                q[i + j] += a * pi * mj;
            }
        }
    }
    while matches!(q.last(), Some(v) if v.is_zero()) {
        q.pop();
    }
    if q.len() != n + 1 {
        // Degree dropped: a root at z = -c exactly.
        return None;
    }
    routh_sign_changes(&q)
}

/// Coefficient tables of (1 ± s)^k for k = 0..=n, ascending powers of s.
fn binomial_powers(n: usize, negative: bool) -> Vec<Vec<Rat>> {
    let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(n + 1);
    rows.push(vec![Rat::one()]);
    for k in 1..=n {
        let prev = &rows[k - 1];
        let mut row = vec![Rat::zero(); k + 1];
        for (i, v) in prev.iter().enumerate() {
            row[i] += v;
            if negative {
                row[i + 1] -= v;
            } else {
                row[i + 1] += v;
            }
        }
        rows.push(row);
    }
    rows
}

/// Routh table on a real polynomial (descending coefficients internally):
/// returns the number of right-half-plane roots as the count of sign changes
/// in the first column, or `None` when the table degenerates (imaginary-axis
/// roots).
fn routh_sign_changes(q_ascending: &[Rat]) -> Option<usize> {
    let mut desc: Vec<Rat> = q_ascending.iter().rev().cloned().collect();
    if desc[0].is_negative() {
        for v in &mut desc {
            *v = -v.clone();
        }
    }
    let mut row0: Vec<Rat> = desc.iter().step_by(2).cloned().collect();
    let mut row1: Vec<Rat> = desc.iter().skip(1).step_by(2).cloned().collect();
    let mut first_col = vec![row0[0].clone()];
    while !row1.is_empty() {
        if row1.iter().all(Zero::is_zero) {
            // Symmetric factor: roots mirrored across the imaginary axis.
            return None;
        }
        if row1[0].is_zero() {
            // Zero pivot with a nonzero row: roots on or about the axis.
            return None;
        }
        first_col.push(row1[0].clone());
        let width = row0.len().max(row1.len());
        let mut next = Vec::with_capacity(width.saturating_sub(1));
        for i in 0..width.saturating_sub(1) {
            let a = row0.get(i + 1).cloned().unwrap_or_else(Rat::zero);
            let b = row1.get(i + 1).cloned().unwrap_or_else(Rat::zero);
            next.push((&row1[0] * a - &row0[0] * b) / &row1[0]);
        }
        row0 = row1;
        row1 = next;
    }
    let mut changes = 0usize;
    for w in first_col.windows(2) {
        if w[0].is_positive() != w[1].is_positive() {
            changes += 1;
        }
    }
    Some(changes)
}

/// True when all roots of `p` lie strictly inside the disk of radius `c`.
pub(crate) fn all_roots_inside(p: &[BigInt], c: &Rat) -> bool {
    matches!(count_outside_disk(p, c), Some(0))
}

/// True when `p` has no repeated root in (lo, hi]: the gcd of p and p' has
/// no root there.
pub(crate) fn simple_in_interval(p: &[BigInt], lo: &Rat, hi: &Rat) -> bool {
    let p = trim(p.to_vec());
    if degree(&p) <= 1 {
        return true;
    }
    let g = from_uni_poly(&to_uni_poly(&p).gcd(&to_uni_poly(&derivative(&p))));
    if degree(&g) == 0 {
        return true;
    }
    let chain = sturm_chain(&square_free_part(&g));
    count_roots_in(&chain, lo, hi) == 0
}

/// The smallest-denominator rational in [lo, hi] (Stern-Brocot descent).
/// Used to recognize exact rational eigenvalues inside tight enclosures: a
/// rational root with denominator b is the unique simplest rational of any
/// interval of width below 1/(2b^2) around it.
pub(crate) fn simplest_in_interval(lo: &Rat, hi: &Rat) -> Rat {
    debug_assert!(lo <= hi);
    if lo.is_positive() {
        simplest_positive(lo, hi)
    } else if hi.is_negative() {
        -simplest_positive(&-hi.clone(), &-lo.clone())
    } else {
        Rat::zero()
    }
}

fn simplest_positive(lo: &Rat, hi: &Rat) -> Rat {
    let fl = lo.floor();
    if *lo == fl {
        return fl;
    }
    let next = &fl + Rat::one();
    if next <= *hi {
        return next;
    }
    // Both endpoints in (fl, fl+1): recurse on the reciprocal interval.
    let a = Rat::one() / (hi - &fl);
    let b = Rat::one() / (lo - &fl);
    fl + Rat::one() / simplest_positive(&a, &b)
}

/// Certified enclosure of the spectral radius (max root modulus) of `p`,
/// bisected to `width`. Returns (lo, hi) with lo <= max modulus <= hi.
pub(crate) fn root_modulus_enclosure(p: &[BigInt], width: &Rat) -> (Rat, Rat) {
    let p = trim(p.to_vec());
    if degree(&p) == 0 {
        return (Rat::zero(), Rat::zero());
    }
    let sf = square_free_part(&p);
    let mut lo = Rat::zero();
    let mut hi = cauchy_bound(&sf);
    debug_assert!(all_roots_inside(&sf, &hi));
    let two = Rat::from_integer(BigInt::from(2));
    while (&hi - &lo) > *width {
        let mid = (&lo + &hi) / &two;
        if mid.is_zero() || all_roots_inside(&sf, &mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}
