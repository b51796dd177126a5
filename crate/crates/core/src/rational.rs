//! Exact rational helpers shared by every module.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::str::FromStr;

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p"` or `"p/q"` with arbitrary-size integers.
pub fn parse(s: &str) -> Result<Rational> {
    let t = s.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
        let d = BigInt::from_str(d.trim()).map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("{s:?}: zero denominator")));
        }
        Ok(Rational::new(n, d))
    } else {
        BigInt::from_str(t)
            .map(Rational::from_integer)
            .map_err(|e| Error::Parse(format!("{s:?}: {e}")))
    }
}

/// `"p/q"`, or `"p"` for integers. Always in lowest terms.
pub fn format(r: &Rational) -> String {
    r.to_string()
}

pub fn to_f64(r: &Rational) -> f64 {
    // numer/denom may individually overflow f64 even when the ratio does not
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            let shift = r.denom().bits().max(r.numer().bits()) as i64 - 60;
            let n = (r.numer() >> shift.max(0) as usize).to_f64().unwrap_or(0.0);
            let d = (r.denom() >> shift.max(0) as usize).to_f64().unwrap_or(1.0);
            n / d
        }
    }
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Binomial coefficient C(n, k); zero when k > n.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Falling factorial n(n-1)...(n-k+1); zero when k > n.
pub fn falling(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    (0..k).fold(BigInt::one(), |acc, i| acc * (n - i))
}

pub fn is_integer(r: &Rational) -> bool {
    r.denom().is_one()
}

pub fn abs(r: &Rational) -> Rational {
    r.abs()
}

/// `serialize_with` helpers writing rationals as `"p/q"` strings.
pub mod ser {
    use serde::ser::{SerializeSeq, Serializer};

    use super::Rational;

    pub fn one<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn opt<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_some(&r.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn seq<S: Serializer>(rs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut out = s.serialize_seq(Some(rs.len()))?;
        for r in rs {
            out.serialize_element(&r.to_string())?;
        }
        out.end()
    }
}
