//! JSON encoding of values.
//!
//! Payloads are plain JSON: booleans and integers are native, a Char is a
//! one-codepoint string, a Pair is a two-element array and sequences are
//! arrays. Decoding needs the expected type. The tagged form
//! `{"t": "<type>", "v": <payload>}` carries the type along.

use serde_json::{json, Number, Value as Json};

use super::Value;
use crate::num::Integer;
use crate::syntax::{parse_type, SemType};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("cannot decode {found} as {expected}")]
pub struct DecodeError {
    pub expected: String,
    pub found: String,
}

fn mismatch<T>(ty: &SemType, found: &Json) -> Result<T, DecodeError> {
    Err(DecodeError { expected: ty.to_string(), found: found.to_string() })
}

fn number(n: &Integer) -> Json {
    let s = n.to_string();
    Json::Number(serde_json::from_str::<Number>(&s).expect("integer literal is valid JSON"))
}

pub fn to_json(v: &Value) -> Json {
    match v {
        Value::Bool(b) => Json::Bool(*b),
        Value::Nat(n) | Value::Int(n) => number(n),
        Value::Char(c) => Json::String(c.to_string()),
        Value::Text(s) => Json::String(s.clone()),
        Value::Pair(a, b) => Json::Array(vec![to_json(a), to_json(b)]),
        Value::Array(xs) | Value::List(xs) => Json::Array(xs.iter().map(to_json).collect()),
    }
}

fn integer(j: &Json) -> Option<Integer> {
    match j {
        Json::Number(n) => n.to_string().parse().ok(),
        _ => None,
    }
}

pub fn from_json(j: &Json, ty: &SemType) -> Result<Value, DecodeError> {
    match ty {
        SemType::Bool => j.as_bool().map(Value::Bool).map_or_else(|| mismatch(ty, j), Ok),
        SemType::Nat => match integer(j) {
            Some(n) if !n.is_negative() => Ok(Value::Nat(n)),
            _ => mismatch(ty, j),
        },
        SemType::Int => integer(j).map(Value::Int).map_or_else(|| mismatch(ty, j), Ok),
        SemType::Char => {
            let mut cs = j.as_str().map(|s| s.chars());
            match cs.as_mut().map(|c| (c.next(), c.next())) {
                Some((Some(c), None)) => Ok(Value::Char(c)),
                _ => mismatch(ty, j),
            }
        }
        SemType::Text => j.as_str().map(|s| Value::Text(s.to_string())).map_or_else(|| mismatch(ty, j), Ok),
        SemType::Pair(ta, tb) => match j.as_array().map(|a| a.as_slice()) {
            Some([a, b]) => Ok(Value::pair(from_json(a, ta)?, from_json(b, tb)?)),
            _ => mismatch(ty, j),
        },
        SemType::Array(t) | SemType::List(t) => {
            let Some(items) = j.as_array() else {
                return mismatch(ty, j);
            };
            let xs = items.iter().map(|x| from_json(x, t)).collect::<Result<Vec<_>, _>>()?;
            Ok(if matches!(ty, SemType::Array(_)) { Value::Array(xs) } else { Value::List(xs) })
        }
    }
}

pub fn to_tagged(v: &Value, ty: &SemType) -> Json {
    json!({ "t": ty.to_string(), "v": to_json(v) })
}

/// Decodes `{"t": .., "v": ..}`, returning the value and its declared type.
pub fn from_tagged(j: &Json) -> Result<(Value, SemType), DecodeError> {
    let bad = || DecodeError { expected: "{\"t\": <type>, \"v\": <payload>}".into(), found: j.to_string() };
    let (Some(t), Some(v)) = (j.get("t").and_then(Json::as_str), j.get("v")) else {
        return Err(bad());
    };
    let ty = parse_type(t).map_err(|_| bad())?;
    Ok((from_json(v, &ty)?, ty))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn big_integers_survive() {
        let n: Integer = "123456789012345678901234567890".parse().unwrap();
        let v = Value::Int(n.neg());
        let j = to_json(&v);
        assert_eq!(j.to_string(), "-123456789012345678901234567890");
        assert_eq!(from_json(&j, &SemType::Int).unwrap(), v);
    }

    #[test]
    fn tagged_round_trip() {
        let ty = SemType::pair(SemType::Char, SemType::list(SemType::Nat));
        let v = Value::pair(Value::Char('é'), Value::List(vec![Value::nat(0), Value::nat(7)]));
        let j = to_tagged(&v, &ty);
        assert_eq!(from_tagged(&j).unwrap(), (v, ty));
    }

    #[test]
    fn decoding_rejects_bad_payloads() {
        assert!(from_json(&json!(-1), &SemType::Nat).is_err());
        assert!(from_json(&json!("ab"), &SemType::Char).is_err());
        assert!(from_json(&json!([1]), &SemType::pair(SemType::Nat, SemType::Nat)).is_err());
    }
}
