//! Arbitrary-precision rational scalars and their `"numerator/denominator"` text form.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use std::str::FromStr;

use crate::CoreError;

/// Exact rational scalar used throughout the cohomology and action layers.
pub type Rat = BigRational;

/// Shorthand for a small integer rational.
pub fn rat_int(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

/// Shorthand for a small fraction; panics on zero denominator.
pub fn rat(n: i64, d: i64) -> Rat {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Canonical text form `"n/d"` with reduced, positive denominator.
pub fn format_rat(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"n"` or `"n/d"`; the denominator must be nonzero.
pub fn parse_rat(s: &str) -> Result<Rat, CoreError> {
    let bad = |_| CoreError::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        None => Ok(Rat::from_integer(BigInt::from_str(s.trim()).map_err(bad)?)),
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(bad)?;
            let d = BigInt::from_str(d.trim()).map_err(bad)?;
            if d.is_zero() {
                return Err(CoreError::Parse(format!("zero denominator: {s:?}")));
            }
            Ok(Rat::new(n, d))
        }
    }
}

/// Nearest-double conversion; exact rationals may round.
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back for numerators/denominators outside f64 range.
        let digits = 30usize;
        let scale = BigInt::from(10u32).pow(digits as u32);
        let scaled = (r * Rat::from_integer(scale.clone())).trunc();
        scaled.to_f64().unwrap_or(f64::NAN) / 1e30
    })
}

/// Compares |r| against a double tolerance exactly (no rounding of `r`).
pub fn rat_abs_le(r: &Rat, tol: f64) -> bool {
    debug_assert!(tol.is_finite() && tol >= 0.0);
    let t = Rat::from_float(tol).expect("finite tolerance");
    r.abs() <= t
}

/// Exact 1-norm of a rational vector.
pub fn l1_norm(v: &[Rat]) -> Rat {
    v.iter().map(Signed::abs).fold(Rat::zero(), |a, b| a + b)
}

/// True if every entry is zero.
pub fn is_zero_vec(v: &[Rat]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// The constant 1 as a `Rat`.
pub fn rat_one() -> Rat {
    Rat::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["3/4", "-7/2", "0/1", "12/1"] {
            let r = parse_rat(s).unwrap();
            assert_eq!(format_rat(&r), s);
        }
        assert_eq!(format_rat(&parse_rat("5").unwrap()), "5/1");
        assert_eq!(format_rat(&parse_rat("6/4").unwrap()), "3/2");
        assert_eq!(format_rat(&parse_rat("3/-6").unwrap()), "-1/2");
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_rat("a/b").is_err());
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("").is_err());
    }

    #[test]
    fn abs_compare_is_exact() {
        let r = parse_rat("1/1000000000").unwrap();
        assert!(rat_abs_le(&r, 1e-9));
        assert!(!rat_abs_le(&r, 1e-10));
    }
}
