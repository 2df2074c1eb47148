//! Exact rational scalars and the scaling utilities shared across the crate.
//!
//! Every algorithm in this crate takes its decisions in exact arithmetic;
//! this module fixes the concrete scalar type and provides the handful of
//! helpers (integerisation, primitive scaling, parsing, rendering) that the
//! other modules share.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Exact rational scalar used throughout the crate.
pub type Rat = BigRational;

/// Integer-valued rational.
#[must_use]
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// The rational `n / d`.
///
/// # Panics
/// Panics if `d == 0`.
#[must_use]
pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p"`, `"-p"` or `"p/q"` (surrounding whitespace allowed).
///
/// Returns `None` for malformed input or a zero denominator.
#[must_use]
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let numer: BigInt = num_str.parse().ok()?;
    let denom: BigInt = den_str.parse().ok()?;
    if denom.is_zero() {
        return None;
    }
    Some(Rat::new(numer, denom))
}

/// Renders a rational as `"p"` or `"p/q"` in lowest terms.
#[must_use]
pub fn render_rat(x: &Rat) -> String {
    let mut out = String::new();
    if x.denom().is_one() {
        let _ = write!(out, "{}", x.numer());
    } else {
        let _ = write!(out, "{}/{}", x.numer(), x.denom());
    }
    out
}

/// Nearest `f64` approximation, for reporting only — never used in decisions.
#[must_use]
pub fn rat_to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Scales a row in place by the unique positive rational that makes every
/// entry an integer with collective gcd 1.  All-zero rows are left untouched.
///
/// Returns the multiplier that was applied.
#[must_use]
pub fn normalize_primitive(row: &mut [Rat]) -> Rat {
    let mut denom_lcm = BigInt::one();
    let mut numer_gcd = BigInt::zero();
    for x in row.iter() {
        if x.is_zero() {
            continue;
        }
        denom_lcm = denom_lcm.lcm(x.denom());
    }
    for x in row.iter() {
        if x.is_zero() {
            continue;
        }
        // After scaling by the denominator lcm every entry is integral.
        let scaled = x.numer() * (&denom_lcm / x.denom());
        numer_gcd = numer_gcd.gcd(&scaled);
    }
    if numer_gcd.is_zero() {
        return Rat::one();
    }
    let mult = Rat::new(denom_lcm, numer_gcd);
    for x in row.iter_mut() {
        *x = &*x * &mult;
    }
    mult
}

/// Returns the primitive integer form of a row without mutating the input,
/// as `BigInt` entries.  All-zero rows map to all-zero integers.
#[must_use]
pub fn primitive_integers(row: &[Rat]) -> Vec<BigInt> {
    let mut work: Vec<Rat> = row.to_vec();
    let _ = normalize_primitive(&mut work);
    work.into_iter()
        .map(|x| x.numer().clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn parses_integers_and_fractions() {
        assert_eq!(parse_rat("3").unwrap(), rat(3));
        assert_eq!(parse_rat("-7").unwrap(), rat(-7));
        assert_eq!(parse_rat(" 2/4 ").unwrap(), ratio(1, 2));
        assert_eq!(parse_rat("-6/4").unwrap(), ratio(-3, 2));
        assert!(parse_rat("1/0").is_none());
        assert!(parse_rat("a/b").is_none());
        assert!(parse_rat("").is_none());
    }

    #[test]
    fn renders_lowest_terms() {
        assert_eq!(render_rat(&ratio(4, 2)), "2");
        assert_eq!(render_rat(&ratio(-3, 6)), "-1/2");
    }

    #[test]
    fn primitive_scaling_clears_denominators_and_gcd() {
        let mut row = vec![ratio(1, 2), ratio(-3, 4), rat(0), rat(2)];
        let mult = normalize_primitive(&mut row);
        assert_eq!(row, vec![rat(2), rat(-3), rat(0), rat(8)]);
        assert_eq!(mult, rat(4));
    }

    #[test]
    fn primitive_scaling_reduces_common_factors() {
        let mut row = vec![rat(6), rat(-9), rat(12)];
        let _ = normalize_primitive(&mut row);
        assert_eq!(row, vec![rat(2), rat(-3), rat(4)]);
    }

    #[test]
    fn primitive_scaling_leaves_zero_rows() {
        let mut row = vec![rat(0), rat(0)];
        let mult = normalize_primitive(&mut row);
        assert_eq!(row, vec![rat(0), rat(0)]);
        assert_eq!(mult, rat(1));
    }
}
