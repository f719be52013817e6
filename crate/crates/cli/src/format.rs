//! Cloud files: JSON (`{"dim", "points", "label"}`) or XYZ text.
//!
//! JSON coordinates are decimal strings (`"-1.25"`, `"3e-2"`) or
//! `[numerator, denominator]` pairs, both exact. Plain JSON numbers are
//! accepted and make the whole cloud a float cloud.

use std::path::Path;

use geowl_core::{ExactCloud, FloatCloud, PointCloud, Rational, Scalar};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::CliError;

/// A parsed cloud in the arithmetic its coordinates allow.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedCloud {
    Exact(ExactCloud),
    Float(FloatCloud),
}

impl LoadedCloud {
    pub fn dim(&self) -> usize {
        match self {
            LoadedCloud::Exact(c) => c.dim(),
            LoadedCloud::Float(c) => c.dim(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            LoadedCloud::Exact(c) => c.len(),
            LoadedCloud::Float(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            LoadedCloud::Exact(c) => c.label(),
            LoadedCloud::Float(c) => c.label(),
        }
    }

    pub fn to_float(&self) -> FloatCloud {
        match self {
            LoadedCloud::Exact(c) => c.convert(),
            LoadedCloud::Float(c) => c.clone(),
        }
    }

    pub fn pad_to(&self, dim: usize) -> LoadedCloud {
        match self {
            LoadedCloud::Exact(c) => LoadedCloud::Exact(c.pad_to(dim)),
            LoadedCloud::Float(c) => LoadedCloud::Float(c.pad_to(dim)),
        }
    }
}

enum Coord {
    Exact(Rational),
    Float(f64),
}

/// Exact value of a decimal literal such as `-12.5e-3`.
pub fn parse_decimal(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int}{frac}");
    let mut num: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().ok()? };
    if neg {
        num = -num;
    }
    let shift = exp - frac.len() as i32;
    let ten = BigInt::from(10u8);
    let scale = num_traits::pow(ten, shift.unsigned_abs() as usize);
    Some(if shift >= 0 {
        Rational::from_integer(num * scale)
    } else {
        Rational::new(num, scale)
    })
}

fn parse_int(v: &Value) -> Option<BigInt> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn parse_coord(v: &Value) -> Result<Coord, CliError> {
    match v {
        Value::String(s) => parse_decimal(s)
            .map(Coord::Exact)
            .ok_or_else(|| CliError::parse(format!("bad decimal coordinate {s:?}"))),
        Value::Array(pair) if pair.len() == 2 => {
            let (Some(n), Some(d)) = (parse_int(&pair[0]), parse_int(&pair[1])) else {
                return Err(CliError::parse(format!("bad rational pair {v}")));
            };
            if d.is_zero() {
                return Err(CliError::parse("zero denominator".into()));
            }
            Ok(Coord::Exact(Rational::new(n, d)))
        }
        Value::Number(n) => n
            .as_f64()
            .filter(|x| x.is_finite())
            .map(Coord::Float)
            .ok_or_else(|| CliError::parse(format!("bad number {n}"))),
        _ => Err(CliError::parse(format!("bad coordinate {v}"))),
    }
}

fn build(dim: usize, rows: Vec<Vec<Coord>>, label: Option<String>) -> Result<LoadedCloud, CliError> {
    let float = rows.iter().flatten().any(|c| matches!(c, Coord::Float(_)));
    let cloud = if float {
        let pts = rows
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|c| match c {
                        Coord::Float(x) => x,
                        Coord::Exact(q) => q.approx(),
                    })
                    .collect()
            })
            .collect();
        LoadedCloud::Float(PointCloud::new(dim, pts).map_err(CliError::from_input)?)
    } else {
        let pts = rows
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|c| match c {
                        Coord::Exact(q) => q,
                        Coord::Float(_) => unreachable!(),
                    })
                    .collect()
            })
            .collect();
        LoadedCloud::Exact(PointCloud::new(dim, pts).map_err(CliError::from_input)?)
    };
    Ok(match label {
        Some(l) => match cloud {
            LoadedCloud::Exact(c) => LoadedCloud::Exact(c.with_label(l)),
            LoadedCloud::Float(c) => LoadedCloud::Float(c.with_label(l)),
        },
        None => cloud,
    })
}

pub fn parse_json(text: &str) -> Result<LoadedCloud, CliError> {
    let v: Value = serde_json::from_str(text).map_err(|e| CliError::parse(format!("malformed JSON: {e}")))?;
    cloud_from_value(&v)
}

pub fn cloud_from_value(v: &Value) -> Result<LoadedCloud, CliError> {
    let points = v
        .get("points")
        .and_then(Value::as_array)
        .ok_or_else(|| CliError::parse("missing \"points\" array".into()))?;
    let rows = points
        .iter()
        .map(|p| {
            p.as_array()
                .ok_or_else(|| CliError::parse(format!("point {p} is not an array")))?
                .iter()
                .map(parse_coord)
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let dim = match v.get("dim") {
        Some(d) => d
            .as_u64()
            .ok_or_else(|| CliError::parse("\"dim\" must be a non-negative integer".into()))? as usize,
        None => rows.first().map_or(0, Vec::len),
    };
    let label = v.get("label").and_then(Value::as_str).map(str::to_owned);
    build(dim, rows, label)
}

/// One point per line, whitespace-separated decimals; `#` starts a comment.
pub fn parse_xyz(text: &str) -> Result<LoadedCloud, CliError> {
    let rows: Vec<Vec<Coord>> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split_whitespace()
                .map(|tok| {
                    parse_decimal(tok)
                        .map(Coord::Exact)
                        .ok_or_else(|| CliError::parse(format!("bad coordinate {tok:?}")))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let dim = rows.first().map_or(0, Vec::len);
    build(dim, rows, None)
}

pub fn load(path: &Path) -> Result<LoadedCloud, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
    let xyz = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("xyz"));
    if xyz || !text.trim_start().starts_with('{') {
        parse_xyz(&text)
    } else {
        parse_json(&text)
    }
}

/// Decimal string when the denominator divides a power of ten, otherwise a
/// `[numerator, denominator]` pair (numbers when they fit in `i64`).
pub fn rational_to_json(q: &Rational) -> Value {
    let mut den = q.denom().clone();
    let two = BigInt::from(2u8);
    let five = BigInt::from(5u8);
    let (mut twos, mut fives) = (0usize, 0usize);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if den.is_one() {
        let k = twos.max(fives);
        let scaled = q * Rational::from_integer(num_traits::pow(BigInt::from(10u8), k));
        let digits = scaled.to_integer().abs().to_string();
        let sign = if q.is_negative() { "-" } else { "" };
        if k == 0 {
            return Value::String(format!("{sign}{digits}"));
        }
        let padded = format!("{digits:0>width$}", width = k + 1);
        let (int, frac) = padded.split_at(padded.len() - k);
        return Value::String(format!("{sign}{int}.{frac}"));
    }
    let part = |b: &BigInt| b.to_i64().map_or_else(|| Value::String(b.to_string()), Value::from);
    json!([part(q.numer()), part(q.denom())])
}

pub fn cloud_to_json(cloud: &LoadedCloud) -> Value {
    let (dim, points, label): (usize, Vec<Value>, Option<&str>) = match cloud {
        LoadedCloud::Exact(c) => (
            c.dim(),
            c.points()
                .iter()
                .map(|p| Value::Array(p.iter().map(rational_to_json).collect()))
                .collect(),
            c.label(),
        ),
        LoadedCloud::Float(c) => (c.dim(), c.points().iter().map(|p| json!(p)).collect(), c.label()),
    };
    let mut v = json!({ "dim": dim, "points": points });
    if let Some(l) = label {
        v["label"] = Value::String(l.to_owned());
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_decimal("1.25"), Some(q(5, 4)));
        assert_eq!(parse_decimal("-0.1"), Some(q(-1, 10)));
        assert_eq!(parse_decimal("3e2"), Some(q(300, 1)));
        assert_eq!(parse_decimal("2.5E-1"), Some(q(1, 4)));
        assert_eq!(parse_decimal(".5"), Some(q(1, 2)));
        assert_eq!(parse_decimal("7."), Some(q(7, 1)));
        for bad in ["", "-", ".", "1.2.3", "abc", "1e", "0x10"] {
            assert_eq!(parse_decimal(bad), None, "{bad}");
        }
    }

    #[test]
    fn rationals_roundtrip_through_json() {
        for (n, d) in [(0, 1), (5, 4), (-1, 10), (1, 3), (-22, 7), (123456789, 1000), (i64::MAX, 3)] {
            let v = q(n, d);
            let back = match rational_to_json(&v) {
                Value::String(s) => parse_decimal(&s).unwrap(),
                Value::Array(p) => Rational::new(parse_int(&p[0]).unwrap(), parse_int(&p[1]).unwrap()),
                other => panic!("{other}"),
            };
            assert_eq!(back, v);
        }
        assert_eq!(rational_to_json(&q(-1, 8)), json!("-0.125"));
        assert_eq!(rational_to_json(&q(1, 3)), json!([1, 3]));
    }

    #[test]
    fn json_and_xyz_agree() {
        let a = parse_json(r#"{"dim": 2, "points": [["0", "0.5"], [[1, 3], "2"]], "label": "x"}"#).unwrap();
        let b = parse_xyz("0 0.5\n# comment\n0.333 2\n").unwrap();
        assert!(matches!(a, LoadedCloud::Exact(_)));
        assert_eq!(a.label(), Some("x"));
        assert_eq!(b.len(), 2);
        assert_eq!(parse_json(&cloud_to_json(&a).to_string()).unwrap(), a);
    }

    #[test]
    fn plain_numbers_force_float() {
        let c = parse_json(r#"{"points": [[0, 1.5], ["2", "3"]]}"#).unwrap();
        assert!(matches!(c, LoadedCloud::Float(_)));
        assert_eq!(c.dim(), 2);
    }

    #[test]
    fn malformed_input_is_a_parse_error() {
        for text in ["{", r#"{"dim": 2}"#, r#"{"points": [[1, "x"]]}"#, r#"{"dim": 3, "points": [["1", "2"]]}"#] {
            assert_eq!(parse_json(text).unwrap_err().exit_code(), 2, "{text}");
        }
    }
}
