//! Exact rational helpers.

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

pub type Rational = BigRational;

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Always renders as `p/q`, including integers.
pub fn format(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Accepts `p/q`, an integer, or a plain decimal such as `0.25`.
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Format(format!("not a rational: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: BigInt = format!("{whole}{frac}").parse().map_err(|_| bad())?;
        let den = num::pow(BigInt::from(10), frac.len());
        return Ok(Rational::new(digits, den));
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(p))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Smallest integer not below `r`; `r` must be non-negative.
pub fn ceil_usize(r: &Rational) -> usize {
    debug_assert!(!r.is_negative());
    r.ceil().to_integer().to_usize().expect("ceiling overflows usize")
}

/// Checks 0 < eps < 1.
pub fn check_epsilon(eps: &Rational) -> Result<()> {
    if eps.is_positive() && eps < &one() {
        Ok(())
    } else {
        Err(crate::error::param(format!("epsilon must lie in (0,1), got {}", format(eps))))
    }
}

pub fn recip(r: &Rational) -> Rational {
    r.recip()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse("1/14").unwrap(), ratio(1, 14));
        assert_eq!(parse("3").unwrap(), int(3));
        assert_eq!(parse("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse(" 2 / 4 ").unwrap(), ratio(1, 2));
        assert!(parse("1/0").is_err());
        assert!(parse("x").is_err());
    }

    #[test]
    fn format_is_always_a_fraction() {
        assert_eq!(format(&int(1)), "1/1");
        assert_eq!(format(&ratio(6, 8)), "3/4");
    }

    #[test]
    fn ceilings() {
        assert_eq!(ceil_usize(&ratio(14, 1)), 14);
        assert_eq!(ceil_usize(&ratio(29, 2)), 15);
    }
}
