//! Exact rational helpers shared by every module.
//!
//! All formula arithmetic runs over [`Q`]; integers only appear as lattice
//! data. Rationals are rendered as `"p/q"` (or `"p"` when `q = 1`) with
//! `q > 0` and `gcd(p, q) = 1`, which is what `BigRational` normalizes to.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Q = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse rational {0:?}")]
pub struct ParseRationalError(pub String);

pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(p: i64, q: i64) -> Q {
    Q::new(BigInt::from(p), BigInt::from(q))
}

pub fn q_big(n: BigInt) -> Q {
    Q::from_integer(n)
}

/// Renders `p/q` in lowest terms, dropping the denominator when it is 1.
pub fn format_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_q(s: &str) -> Result<Q, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let t = s.trim();
    let (p, q) = match t.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (t, "1"),
    };
    let p: BigInt = p.parse().map_err(|_| err())?;
    let q: BigInt = q.parse().map_err(|_| err())?;
    if q.is_zero() {
        return Err(err());
    }
    Ok(Q::new(p, q))
}

/// Integer power with a possibly negative exponent. `None` on `0^(-k)`.
pub fn pow_i(x: &Q, e: i64) -> Option<Q> {
    if e >= 0 {
        Some(num_traits::pow(x.clone(), e as usize))
    } else if x.is_zero() {
        None
    } else {
        Some(num_traits::pow(x.recip(), (-e) as usize))
    }
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Serde adapter storing a rational as its `p/q` string.
pub mod serde_q {
    use super::{format_q, parse_q, Q};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_lowest_terms() {
        assert_eq!(format_q(&q_frac(6, -4)), "-3/2");
        assert_eq!(format_q(&q_int(7)), "7");
        assert_eq!(format_q(&q_frac(0, 5)), "0");
    }

    #[test]
    fn parses_both_forms() {
        assert_eq!(parse_q("3/6").unwrap(), q_frac(1, 2));
        assert_eq!(parse_q(" -12 ").unwrap(), q_int(-12));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("1.5").is_err());
    }

    #[test]
    fn negative_powers() {
        assert_eq!(pow_i(&q_frac(2, 3), -2).unwrap(), q_frac(9, 4));
        assert!(pow_i(&q_int(0), -1).is_none());
        assert_eq!(pow_i(&q_int(0), 0).unwrap(), q_int(1));
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), BigInt::from(1));
        assert_eq!(factorial(6), BigInt::from(720));
    }
}
