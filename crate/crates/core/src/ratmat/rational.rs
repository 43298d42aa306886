use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary precision rational number, always kept in lowest terms.
pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"-1.25"` or `"3e-2"`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::ParseRational(text.to_string());
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(num, den));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Ok(Rational::from_integer(n));
    }
    parse_decimal(s).ok_or_else(bad)
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, fractional) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && fractional.is_empty() {
        return None;
    }
    if !whole.chars().chain(fractional.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{whole}{fractional}");
    let mut value = Rational::from_integer(all_digits.parse::<BigInt>().ok()?);
    let shift = exponent - fractional.len() as i32;
    let ten = BigInt::from(10);
    let scale = num_traits::pow(ten, shift.unsigned_abs() as usize);
    if shift >= 0 {
        value *= Rational::from_integer(scale);
    } else {
        value /= Rational::from_integer(scale);
    }
    Some(if negative { -value } else { value })
}

/// `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(value: &Rational) -> String {
    value.to_string()
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or_else(|| {
        if value.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// The exact binary value of a finite float.
pub fn from_f64_exact(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Best rational approximation of `x` with denominator at most `max_denominator`.
///
/// Walks the continued fraction of the exact binary value of `x`; the answer is
/// either the last convergent within the bound or the largest admissible
/// semiconvergent. Ties go to the smaller denominator.
pub fn rationalize(x: f64, max_denominator: u64) -> Rational {
    assert!(x.is_finite(), "rationalize needs a finite input");
    let bound = BigInt::from(max_denominator.max(1));
    let target = Rational::from_float(x).expect("finite float");

    let (mut p_prev, mut q_prev) = (BigInt::zero(), BigInt::one());
    let (mut p, mut q) = (BigInt::one(), BigInt::zero());
    let mut rest = target.clone();
    loop {
        let a = rest.floor().to_integer();
        let q_next = &a * &q + &q_prev;
        if q_next > bound {
            let steps = (&bound - &q_prev) / &q;
            let semi = Rational::new(&steps * &p + &p_prev, &steps * &q + &q_prev);
            let conv = Rational::new(p, q);
            let d_semi = (&semi - &target).abs();
            let d_conv = (&conv - &target).abs();
            return match d_semi.cmp(&d_conv) {
                Ordering::Less => semi,
                Ordering::Greater => conv,
                Ordering::Equal => {
                    if semi.denom() < conv.denom() {
                        semi
                    } else {
                        conv
                    }
                }
            };
        }
        let p_next = &a * &p + &p_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        let remainder = &rest - Rational::from_integer(a);
        if remainder.is_zero() {
            return Rational::new(p, q);
        }
        rest = remainder.recip();
    }
}

/// Serde adapter storing a rational as its `"p/q"` string.
pub mod serde_rational {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(de::Error::custom)
    }
}

/// Serde adapter for a vector of `"p/q"` strings.
pub mod serde_rational_vec {
    use super::*;
    use serde::{de, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        values: &[Rational],
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(values.len()))?;
        for v in values {
            seq.serialize_element(&format_rational(v))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Rational>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts
            .iter()
            .map(|t| parse_rational(t).map_err(de::Error::custom))
            .collect()
    }
}

/// Serde adapter for an optional `"p/q"` string.
pub mod serde_rational_opt {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match value {
            Some(v) => s.serialize_some(&format_rational(v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|t| parse_rational(&t).map_err(de::Error::custom))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_best(x: f64, max_den: i64) -> Rational {
        let target = Rational::from_float(x).unwrap();
        let mut best: Option<(Rational, Rational)> = None;
        for q in 1..=max_den {
            let qq = Rational::from_integer(BigInt::from(q));
            let center = (&target * &qq).floor().to_integer();
            for p in [&center - 1, center.clone(), &center + 1] {
                let cand = Rational::new(p, BigInt::from(q));
                let dist = (&cand - &target).abs();
                let better = match &best {
                    None => true,
                    Some((_, d)) => dist < *d,
                };
                if better {
                    best = Some((cand, dist));
                }
            }
        }
        best.unwrap().0
    }

    #[test]
    fn rationalize_examples() {
        assert_eq!(rationalize(0.5, 10), frac(1, 2));
        assert_eq!(rationalize(-1.0, 10), int(-1));
        assert_eq!(rationalize(0.333334, 100), frac(1, 3));
        assert_eq!(brute_force_best(0.333334, 100), frac(1, 3));
    }

    #[test]
    fn rationalize_matches_enumeration() {
        let samples = [
            0.1, -0.7071067811865476, 3.14159265358979, 2.718281828, -12.3456, 1e-5, 0.999, 7.0,
            -0.499999, 0.12345678,
        ];
        for &x in &samples {
            for &m in &[1i64, 2, 7, 10, 57, 100, 499] {
                assert_eq!(
                    rationalize(x, m as u64),
                    brute_force_best(x, m),
                    "x = {x}, max denominator = {m}"
                );
            }
        }
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("3/6").unwrap(), frac(1, 2));
        assert_eq!(parse_rational("-4").unwrap(), int(-4));
        assert_eq!(parse_rational("-1.25").unwrap(), frac(-5, 4));
        assert_eq!(parse_rational("2.5e-1").unwrap(), frac(1, 4));
        assert_eq!(parse_rational(".5").unwrap(), frac(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert_eq!(format_rational(&frac(-6, 4)), "-3/2");
        assert_eq!(format_rational(&int(5)), "5");
    }

    proptest::proptest! {
        #[test]
        fn rationalize_never_beaten(x in -50.0f64..50.0, m in 1u64..60) {
            let got = rationalize(x, m);
            proptest::prop_assert!(got.denom() <= &BigInt::from(m));
            let best = brute_force_best(x, m as i64);
            let target = Rational::from_float(x).unwrap();
            proptest::prop_assert!((&got - &target).abs() <= (&best - &target).abs());
        }

        #[test]
        fn format_parse_round_trip(n in -1000i64..1000, d in 1i64..1000) {
            let r = frac(n, d);
            proptest::prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
    }
}
