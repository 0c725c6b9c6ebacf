//! Exact rational arithmetic helpers.
//!
//! All payments, expectations, and gap comparisons in this crate are exact
//! `BigRational` values. Floating point never enters a computation; decimal
//! strings produced here are renderings of exact values, computed by integer
//! long division.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// The crate-wide exact rational type.
pub type Rat = num_rational::BigRational;

/// Shorthand constructor from machine integers.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"p/q"` or plain `"p"` into an exact rational.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let num: BigInt = p.trim().parse().ok()?;
            let den: BigInt = q.trim().parse().ok()?;
            if den.is_zero() {
                return None;
            }
            Some(Rat::new(num, den))
        }
        None => {
            let num: BigInt = s.parse().ok()?;
            Some(Rat::from_integer(num))
        }
    }
}

/// Renders a rational as the canonical `"p/q"` string (`"p"` when integral).
pub fn rat_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Smallest integer `e >= 0` with `2^e >= r`, for positive `r`.
///
/// This is the exponent used to size the rounding grid `G = 2^(1+e)` for a
/// (possibly non-integer) positive rational gap parameter.
pub fn ceil_log2(r: &Rat) -> u32 {
    assert!(r.is_positive(), "ceil_log2 requires a positive argument");
    let mut e = 0u32;
    let mut pow = Rat::one();
    let two = rat(2, 1);
    while pow < *r {
        pow *= &two;
        e += 1;
    }
    e
}

/// Exact ceiling of a rational, as a `BigInt`.
pub fn ceil(r: &Rat) -> BigInt {
    r.ceil().to_integer()
}

/// Exact floor of a rational, as a `BigInt`.
pub fn floor(r: &Rat) -> BigInt {
    r.floor().to_integer()
}

/// Renders a decimal approximation of an exact rational.
///
/// Values with small magnitude switch to scientific notation so that tail
/// probabilities around 1e-10 remain readable. The digits are produced by
/// exact integer division; only the *rendering* is approximate.
pub fn rat_decimal(r: &Rat, digits: usize) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    let neg = r.is_negative();
    let abs = r.abs();
    let num = abs.numer().to_biguint().expect("abs numerator");
    let den = abs.denom().to_biguint().expect("abs denominator");

    // Decimal exponent estimate: |r| = num/den ~ 10^(digits(num) - digits(den)).
    let exp10 = num.to_string().len() as i64 - den.to_string().len() as i64;
    let small = exp10 < -4;

    let body = if small {
        // Scientific rendering: scale so the integer part carries `digits` digits.
        let shift = (digits as i64) - exp10;
        let scaled = &num * BigUint::from(10u32).pow(shift as u32) / &den;
        let s = scaled.to_string();
        let actual_exp = exp10 + (s.len() as i64 - digits as i64 - 1);
        let mantissa = if s.len() > 1 {
            format!("{}.{}", &s[..1], &s[1..s.len().min(digits)])
        } else {
            s.clone()
        };
        format!("{}e{}", mantissa, actual_exp)
    } else {
        let int_part = &num / &den;
        let mut rem = &num % &den;
        let mut frac = String::new();
        for _ in 0..digits {
            if rem.is_zero() {
                break;
            }
            rem *= BigUint::from(10u32);
            frac.push_str(&(&rem / &den).to_string());
            rem %= &den;
        }
        if frac.is_empty() {
            int_part.to_string()
        } else {
            format!("{}.{}", int_part, frac)
        }
    };
    if neg {
        format!("-{}", body)
    } else {
        body
    }
}

/// Exact natural-log enclosure `[lo, hi]` of a positive integer `n`.
///
/// Uses `ln n = m ln 2 + ln(n / 2^m)` with `n / 2^m` in `[1, 2)`, both terms
/// from the atanh series `ln z = 2 sum z'^(2k+1)/(2k+1)`, `z' = (z-1)/(z+1)`,
/// with a rigorous geometric tail bound. `terms` controls the precision.
pub fn ln_interval(n: u64, terms: usize) -> (Rat, Rat) {
    assert!(n >= 1, "ln_interval requires n >= 1");
    if n == 1 {
        return (Rat::zero(), Rat::zero());
    }
    let mut m = 0u32;
    let mut pow = BigUint::from(1u32);
    while &pow * 2u32 <= BigUint::from(n) {
        pow *= 2u32;
        m += 1;
    }
    let (ln2_lo, ln2_hi) = ln_series(&rat(2, 1), terms);
    let rest = Rat::new(BigInt::from(n), BigInt::from(pow));
    let (rest_lo, rest_hi) = ln_series(&rest, terms);
    let m_rat = Rat::from_integer(BigInt::from(m));
    (&m_rat * ln2_lo + rest_lo, &m_rat * ln2_hi + rest_hi)
}

/// atanh-series enclosure of `ln z` for rational `z >= 1`.
fn ln_series(z: &Rat, terms: usize) -> (Rat, Rat) {
    assert!(*z >= Rat::one());
    if z.is_one() {
        return (Rat::zero(), Rat::zero());
    }
    let w = (z - Rat::one()) / (z + Rat::one());
    let w2 = &w * &w;
    let mut sum = Rat::zero();
    let mut pow = w.clone();
    for k in 0..terms {
        sum += &pow / Rat::from_integer(BigInt::from(2 * k as u64 + 1));
        pow *= &w2;
    }
    let lo = &sum * rat(2, 1);
    // Tail: 2 sum_{k>=K} w^(2k+1)/(2k+1) <= 2 w^(2K+1) / ((2K+1)(1 - w^2)).
    let tail = rat(2, 1) * &pow
        / (Rat::from_integer(BigInt::from(2 * terms as u64 + 1)) * (Rat::one() - &w2));
    (lo.clone(), lo + tail)
}

/// Sanity conversion used only in doc output and tests, never in computation.
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_render_round_trip() {
        let r = parse_rat("3/4").unwrap();
        assert_eq!(r, rat(3, 4));
        assert_eq!(rat_string(&r), "3/4");
        assert_eq!(rat_string(&rat(4, 2)), "2");
        assert!(parse_rat("1/0").is_none());
        assert_eq!(parse_rat("7").unwrap(), rat(7, 1));
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(&rat(1, 1)), 0);
        assert_eq!(ceil_log2(&rat(2, 1)), 1);
        assert_eq!(ceil_log2(&rat(3, 1)), 2);
        assert_eq!(ceil_log2(&rat(8, 1)), 3);
        assert_eq!(ceil_log2(&rat(3, 2)), 1);
        assert_eq!(ceil_log2(&rat(1, 3)), 0);
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(rat_decimal(&rat(1, 2), 6), "0.5");
        assert_eq!(rat_decimal(&rat(-3, 4), 6), "-0.75");
        assert_eq!(rat_decimal(&rat(1, 3), 4), "0.3333");
        assert_eq!(rat_decimal(&rat(0, 1), 4), "0");
        // Tiny value flips to scientific form.
        let tiny = Rat::new(BigInt::from(1), BigInt::from(1_000_000_000u64));
        assert!(rat_decimal(&tiny, 4).contains('e'));
    }

    #[test]
    fn ln_interval_brackets_known_values() {
        let (lo, hi) = ln_interval(16, 64);
        // ln 16 = 2.7725887222397812...
        let below = parse_rat("27725887222397811/10000000000000000").unwrap();
        let above = parse_rat("27725887222397813/10000000000000000").unwrap();
        assert!(lo <= above && hi >= below);
        assert!(hi.clone() - lo.clone() < rat(1, 1_000_000_000));
        assert!(lo > below - rat(1, 1000));
        let (lo1, hi1) = ln_interval(1, 8);
        assert!(lo1.is_zero() && hi1.is_zero());
    }
}
