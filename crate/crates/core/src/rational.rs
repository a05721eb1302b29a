//! Exact rational numbers for instance data.
//!
//! Values are read from decimal literals (`0.25`, `1e-3`) or `"p/q"`
//! strings without passing through binary floating point.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn pow2(exp: i64) -> Rational {
    let base = Rational::from_integer(BigInt::from(2));
    if exp >= 0 {
        num_traits::pow(base, exp as usize)
    } else {
        num_traits::pow(base, (-exp) as usize).recip()
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Parse a decimal literal (optional sign, fraction and exponent) or a
/// `p/q` fraction.
pub fn parse(text: &str) -> Result<Rational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty number".into()));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in `{s}`")))?;
        let q: BigInt = q
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in `{s}`")))?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(Rational::new(p, q));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("not a number: `{s}`"));
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i64 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    if exponent.abs() > 4096 {
        return Err(Error::Parse(format!("exponent out of range in `{s}`")));
    }
    let all: BigInt = format!("0{whole}{frac}").parse().map_err(|_| bad())?;
    let scale = exponent - frac.len() as i64;
    let ten = BigInt::from(10);
    let mut value = Rational::from_integer(all);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// Canonical text form: integers print bare, everything else as `p/q`.
pub fn format(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// `floor(log2(r))` for `r >= 1`, by integer comparison only.
pub fn floor_log2(r: &Rational) -> Result<u32> {
    if r < &Rational::one() {
        return Err(Error::InvalidParameter(format!(
            "floor_log2 needs r >= 1, got {}",
            format(r)
        )));
    }
    // numer >= denom * 2^s  <=>  r >= 2^s
    let numer = r.numer();
    let denom = r.denom();
    let mut s = (numer.bits() - denom.bits()) as u32;
    while (denom << s as usize) > *numer {
        s -= 1;
    }
    Ok(s)
}

/// Serde adapter: numbers become JSON integers when integral, `"p/q"`
/// strings otherwise; either form (and decimals) is accepted on input.
pub mod serde_rational {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(serde_json::Number),
        Str(String),
    }

    pub fn serialize<S: Serializer>(r: &Rational, ser: S) -> std::result::Result<S::Ok, S::Error> {
        if r.is_integer() {
            if let Some(v) = r.numer().to_i64() {
                return ser.serialize_i64(v);
            }
        }
        ser.serialize_str(&format(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Rational, D::Error> {
        let raw = Raw::deserialize(de)?;
        let text = match raw {
            Raw::Num(n) => n.to_string(),
            Raw::Str(s) => s,
        };
        parse(&text).map_err(serde::de::Error::custom)
    }

    pub mod option {
        use super::*;
        use serde::Serialize;

        #[derive(Serialize)]
        struct Wrap<'a>(#[serde(with = "super")] &'a Rational);

        pub fn serialize<S: Serializer>(
            r: &Option<Rational>,
            ser: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            match r {
                Some(v) => Wrap(v).serialize(ser),
                None => ser.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            de: D,
        ) -> std::result::Result<Option<Rational>, D::Error> {
            #[derive(Deserialize)]
            struct W(#[serde(with = "super")] Rational);
            Ok(Option::<W>::deserialize(de)?.map(|w| w.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_parse_exactly() {
        assert_eq!(parse("0.1").unwrap(), ratio(1, 10));
        assert_eq!(parse("-2.50").unwrap(), ratio(-5, 2));
        assert_eq!(parse("1e-3").unwrap(), ratio(1, 1000));
        assert_eq!(parse("1.5E2").unwrap(), int(150));
        assert_eq!(parse(".5").unwrap(), ratio(1, 2));
    }

    #[test]
    fn fractions_parse() {
        assert_eq!(parse("2/3").unwrap(), ratio(2, 3));
        assert_eq!(parse(" -4 / 6 ").unwrap(), ratio(-2, 3));
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
        assert!(parse("").is_err());
        assert!(parse("1.2.3").is_err());
    }

    #[test]
    fn format_is_canonical() {
        assert_eq!(format(&int(3)), "3");
        assert_eq!(format(&ratio(6, 4)), "3/2");
    }

    #[test]
    fn floor_log2_exact() {
        assert_eq!(floor_log2(&int(1)).unwrap(), 0);
        assert_eq!(floor_log2(&int(3)).unwrap(), 1);
        assert_eq!(floor_log2(&int(4)).unwrap(), 2);
        assert_eq!(floor_log2(&ratio(7, 2)).unwrap(), 1);
        assert_eq!(floor_log2(&ratio(1025, 1)).unwrap(), 10);
        assert_eq!(floor_log2(&ratio(1023, 1)).unwrap(), 9);
        assert!(floor_log2(&ratio(1, 2)).is_err());
    }

    #[test]
    fn pow2_both_signs() {
        assert_eq!(pow2(3), int(8));
        assert_eq!(pow2(-2), ratio(1, 4));
    }
}
