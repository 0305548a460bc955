//! Exact decimal parsing and a deterministic JSON writer.
//!
//! Input files carry numbers as decimal strings; output floats are always
//! printed with 17 significant digits so that repeated runs are byte-identical.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::Deserialize;
use serde_json::Value;
use std::fmt::Write as _;

/// Parses `[-+]digits[.digits][e[-+]digits]` into an exact rational.
pub fn parse_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.as_bytes().first()? {
        b'-' => (true, &mant[1..]),
        b'+' => (false, &mant[1..]),
        _ => (false, mant),
    };
    let (int, frac) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let mut num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    if neg {
        num = -num;
    }
    let shift = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let r = if shift >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, shift as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-shift) as usize))
    };
    Some(r)
}

/// Accepts a decimal or an exact fraction `p/q`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            (!q.is_zero()).then(|| BigRational::new(p, q))
        }
        None => parse_decimal(s),
    }
}

/// A number given either as a JSON number or as a decimal string.
#[derive(Clone, Debug, PartialEq)]
pub struct Decimal(pub BigRational);

impl Decimal {
    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.0)
    }
}

/// Correctly rounded (ties to even) conversion for normal-range values.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    use num_bigint::Sign;
    if r.is_zero() {
        return 0.0;
    }
    let neg = r.numer().sign() == Sign::Minus;
    let n = r.numer().magnitude().clone();
    let d = r.denom().magnitude().clone();
    // Choose k with 2^53 <= n·2^k / d < 2^54.
    let mut k = 53 - (n.bits() as i64 - d.bits() as i64);
    let quot = |k: i64| {
        let (a, b) = if k >= 0 { (&n << k as usize, d.clone()) } else { (n.clone(), &d << (-k) as usize) };
        let q = &a / &b;
        let rem = &a - &q * &b;
        (q, rem)
    };
    let (mut q, mut rem) = quot(k);
    if q.bits() > 54 {
        k -= 1;
        (q, rem) = quot(k);
    } else if q.bits() < 54 {
        k += 1;
        (q, rem) = quot(k);
    }
    // Now q has 54 bits; drop one with rounding.
    let low = q.bit(0);
    let mut m = &q >> 1usize;
    let sticky = !rem.is_zero();
    if low && (sticky || m.bit(0)) {
        m += 1u32;
    }
    let mant = m.to_u64().unwrap_or(u64::MAX) as f64;
    let e = (1 - k).clamp(-2200, 2200) as i32;
    let x = mant * 2f64.powi(e / 2) * 2f64.powi(e - e / 2);
    if neg {
        -x
    } else {
        x
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        let text = match &v {
            Value::String(s) => s.clone(),
            Value::Number(n) => n.to_string(),
            _ => return Err(de::Error::custom("expected a decimal string or number")),
        };
        parse_rational(&text)
            .map(Decimal)
            .ok_or_else(|| de::Error::custom(format!("invalid decimal `{text}`")))
    }
}

/// An ideal point on ℝ ∪ {∞}: a decimal or the string `"inf"`.
#[derive(Clone, Debug, PartialEq)]
pub enum DecimalOrInf {
    Finite(f64),
    Infinite,
}

impl<'de> Deserialize<'de> for DecimalOrInf {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        if let Value::String(s) = &v {
            if s.trim() == "inf" || s.trim() == "∞" {
                return Ok(DecimalOrInf::Infinite);
            }
        }
        let dec = Decimal::deserialize(v).map_err(de::Error::custom)?;
        Ok(DecimalOrInf::Finite(dec.to_f64()))
    }
}

/// Formats a float with 17 significant digits, the shortest width that
/// round-trips every f64.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "\"nan\"".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "\"inf\"".into() } else { "\"-inf\"".into() };
    }
    if x == 0.0 {
        return "0.0".into();
    }
    format!("{x:.16e}")
}

pub fn num(x: f64) -> Value {
    match serde_json::Number::from_f64(x) {
        Some(n) => Value::Number(n),
        None if x.is_nan() => Value::String("nan".into()),
        None if x > 0.0 => Value::String("inf".into()),
        None => Value::String("-inf".into()),
    }
}

pub fn rational(r: &BigRational) -> Value {
    if r.denom().is_one() {
        Value::String(r.numer().to_string())
    } else {
        Value::String(format!("{}/{}", r.numer(), r.denom()))
    }
}

/// Serializes with sorted keys, two-space indentation and fixed float format.
pub fn to_canonical_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&fmt_f64(n.as_f64().unwrap_or(f64::NAN)));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).unwrap_or_default()),
        Value::Array(a) => {
            if a.is_empty() {
                out.push_str("[]");
                return;
            }
            let flat = a.iter().all(|x| !x.is_array() && !x.is_object());
            if flat {
                out.push('[');
                for (i, x) in a.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, x, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, x, indent + 1);
                if i + 1 < a.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(m) => {
            if m.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                pad(out, indent + 1);
                let _ = write!(out, "{}: ", serde_json::to_string(k).unwrap_or_default());
                write_value(out, &m[*k], indent + 1);
                if i + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

/// Reads the `schema` field and checks its family prefix.
pub fn check_schema(v: &Value, family: &str) -> Result<(), String> {
    match v.get("schema").and_then(Value::as_str) {
        Some(s) if s.split('/').next() == Some(family) => Ok(()),
        Some(s) => Err(format!("field `schema`: expected `{family}/<version>`, found `{s}`")),
        None => Err(format!("field `schema`: missing (expected `{family}/<version>`)")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_parse_exactly() {
        let r = parse_decimal("-0.125").unwrap();
        assert_eq!(r, BigRational::new(BigInt::from(-1), BigInt::from(8)));
        assert_eq!(parse_decimal("1e3").unwrap(), BigRational::from_integer(BigInt::from(1000)));
        assert_eq!(parse_decimal("2.5E-1").unwrap(), BigRational::new(1.into(), 4.into()));
        assert!(parse_decimal("1..2").is_none());
        assert!(parse_decimal("abc").is_none());
    }

    #[test]
    fn rational_to_f64_matches_parse() {
        for s in ["0.1", "3.14159265358979323846", "-2.5e-7", "123456789.000001", "-1.0770409589202001e-1", "7.0e-300", "9.9e290"] {
            let r = parse_decimal(s).unwrap();
            assert_eq!(rational_to_f64(&r), s.parse::<f64>().unwrap(), "{s}");
        }
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        let v = serde_json::json!({"b": num(0.5), "a": [1, 2]});
        assert_eq!(to_canonical_string(&v), "{\n  \"a\": [1, 2],\n  \"b\": 5.0000000000000000e-1\n}\n");
    }
}
