//! Exact rational scalar used throughout the crate.
//!
//! `Rat` is an arbitrary-precision rational, always in lowest terms with a
//! positive denominator (the backing type guarantees both). Helpers here
//! cover integer/ratio construction, exact decimal parsing, and decimal
//! rendering for exports.

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = num_rational::BigRational;

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `n/d` as an exact rational. Panics if `d == 0`.
pub fn frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn big(n: BigInt) -> Rat {
    Rat::from_integer(n)
}

pub fn floor_int(x: &Rat) -> BigInt {
    x.floor().to_integer()
}

pub fn ceil_int(x: &Rat) -> BigInt {
    x.ceil().to_integer()
}

/// Parses an exact decimal like `-12.5e-3`, `0.25`, `1e8`, or a ratio like
/// `3/7`. This exists because binary floats cannot represent most decimals.
pub fn parse(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty number".into());
    }
    if let Some((n, d)) = s.split_once('/') {
        let num: BigInt = n.trim().parse().map_err(|e| format!("bad numerator: {e}"))?;
        let den: BigInt = d.trim().parse().map_err(|e| format!("bad denominator: {e}"))?;
        if den.is_zero() {
            return Err("zero denominator".into());
        }
        return Ok(Rat::new(num, den));
    }
    let (mantissa, exp10) = match s.split_once(['e', 'E']) {
        Some((m, e)) => {
            let exp: i64 = e.parse().map_err(|e| format!("bad exponent: {e}"))?;
            (m, exp)
        }
        None => (s, 0),
    };
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(format!("no digits in {s:?}"));
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(format!("invalid digits in {s:?}"));
    }
    let joined = format!("{int_part}{frac_part}");
    let mantissa_int: BigInt = if joined.is_empty() {
        BigInt::zero()
    } else {
        joined.parse().map_err(|e| format!("bad mantissa: {e}"))?
    };
    let scale = exp10 - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let mut value = Rat::from_integer(mantissa_int * BigInt::from(sign));
    if scale >= 0 {
        value *= Rat::from_integer(ten.pow(scale as u32));
    } else {
        value /= Rat::from_integer(ten.pow((-scale) as u32));
    }
    Ok(value)
}

/// Exactly converts a finite binary float (every finite f64 is a rational).
pub fn from_f64_exact(x: f64) -> Result<Rat, String> {
    Rat::from_float(x).ok_or_else(|| format!("non-finite float {x}"))
}

fn decimal_digits_of(x: &Rat, digits: u32, round_half_up: bool) -> (Sign, BigInt, BigInt) {
    // Returns (sign, integer part, fractional digits as an integer with
    // exactly `digits` decimal places) of |x| after rounding/truncation.
    let scale = BigInt::from(10).pow(digits);
    let scaled = x.abs() * Rat::from_integer(scale.clone());
    let units = if round_half_up {
        // round half away from zero
        let twice = &scaled * Rat::from_integer(BigInt::from(2)) + Rat::from_integer(BigInt::one());
        twice.floor().to_integer() / BigInt::from(2)
    } else {
        scaled.floor().to_integer()
    };
    let (ipart, fpart) = (units.clone() / &scale, units % &scale);
    let sign = if x.is_negative() && !(ipart.is_zero() && fpart.is_zero()) {
        Sign::Minus
    } else {
        Sign::Plus
    };
    (sign, ipart, fpart)
}

fn render(sign: Sign, ipart: BigInt, fpart: BigInt, digits: u32) -> String {
    let neg = if sign == Sign::Minus { "-" } else { "" };
    if digits == 0 {
        format!("{neg}{ipart}")
    } else {
        format!("{neg}{ipart}.{:0>width$}", fpart, width = digits as usize)
    }
}

/// Decimal string with `digits` places, rounding half away from zero.
pub fn to_decimal(x: &Rat, digits: u32) -> String {
    let (s, i, f) = decimal_digits_of(x, digits, true);
    render(s, i, f, digits)
}

/// Decimal string with `digits` places, truncating toward zero.
pub fn to_decimal_trunc(x: &Rat, digits: u32) -> String {
    let (s, i, f) = decimal_digits_of(x, digits, false);
    render(s, i, f, digits)
}

/// Like `to_decimal`, but with trailing fractional zeros (and a bare
/// decimal point) removed: `4.2500` becomes `4.25`, `3.0000` becomes `3`.
pub fn to_decimal_trim(x: &Rat, digits: u32) -> String {
    let s = to_decimal(x, digits);
    if !s.contains('.') {
        return s;
    }
    let s = s.trim_end_matches('0');
    s.trim_end_matches('.').to_string()
}

/// Lossy conversion for plotting/sorting only; never used in computations.
pub fn to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
