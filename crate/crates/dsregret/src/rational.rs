//! Thin helpers around `BigRational`: parsing, canonical formatting,
//! exponentiation and decimal rendering.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type Rational = num_rational::BigRational;

/// `n/d` as a rational. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Integer `n` as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `p/q` or a plain integer `p`. Accepts an optional leading sign on
/// the numerator; `q` must be a positive integer.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| format!("invalid numerator '{num}'"))?;
    let d: BigInt = match den {
        Some(d) => d.parse().map_err(|_| format!("invalid denominator '{d}'"))?,
        None => BigInt::one(),
    };
    if d <= BigInt::zero() {
        return Err(format!("denominator must be positive in '{s}'"));
    }
    Ok(Rational::new(n, d))
}

/// Canonical `p/q` rendering: reduced, positive denominator, sign on the
/// numerator. Integers render as `p/1`.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// `r^e` by binary exponentiation.
pub fn pow(r: &Rational, e: u64) -> Rational {
    let mut base = r.clone();
    let mut e = e;
    let mut acc = Rational::one();
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    acc
}

/// Renders `r` with exactly `digits` fractional digits, rounding half to
/// even. Display-only; never used inside the solvers.
pub fn to_decimal(r: &Rational, digits: u32) -> String {
    let scale = BigInt::from(10u32).pow(digits);
    let scaled_num = r.numer().abs() * &scale;
    let den = r.denom().clone();
    let (mut q, rem) = scaled_num.div_rem(&den);
    let twice = &rem * BigInt::from(2);
    if twice > den || (twice == den && q.is_odd()) {
        q += 1;
    }
    let sign = if r.is_negative() && !q.is_zero() { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{q}");
    }
    let (int_part, frac_part) = q.div_rem(&scale);
    format!(
        "{sign}{int_part}.{frac:0>width$}",
        frac = frac_part,
        width = digits as usize
    )
}
