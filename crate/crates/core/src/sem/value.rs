use std::fmt;

use crate::num::Integer;
use crate::syntax::SemType;

/// A runtime datum. Nat payloads are never negative.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Bool(bool),
    Nat(Integer),
    Int(Integer),
    Char(char),
    Text(String),
    Pair(Box<Value>, Box<Value>),
    Array(Vec<Value>),
    List(Vec<Value>),
}

impl Value {
    pub fn nat(n: impl Into<Integer>) -> Value {
        let n = n.into();
        debug_assert!(!n.is_negative());
        Value::Nat(n)
    }

    pub fn int(n: impl Into<Integer>) -> Value {
        Value::Int(n.into())
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }

    /// The value produced by an out-of-range `a[i]!` of this element type.
    pub fn default_of(ty: &SemType) -> Value {
        match ty {
            SemType::Bool => Value::Bool(false),
            SemType::Nat => Value::Nat(Integer::ZERO),
            SemType::Int => Value::Int(Integer::ZERO),
            SemType::Char => Value::Char('A'),
            SemType::Text => Value::Text(String::new()),
            SemType::Pair(a, b) => Value::pair(Value::default_of(a), Value::default_of(b)),
            SemType::Array(_) => Value::Array(Vec::new()),
            SemType::List(_) => Value::List(Vec::new()),
        }
    }

    /// True when the tag (recursively) agrees with `ty` and Nat payloads are non-negative.
    pub fn has_type(&self, ty: &SemType) -> bool {
        match (self, ty) {
            (Value::Bool(_), SemType::Bool) | (Value::Int(_), SemType::Int) => true,
            (Value::Char(_), SemType::Char) | (Value::Text(_), SemType::Text) => true,
            (Value::Nat(n), SemType::Nat) => !n.is_negative(),
            (Value::Pair(a, b), SemType::Pair(ta, tb)) => a.has_type(ta) && b.has_type(tb),
            (Value::Array(xs), SemType::Array(t)) | (Value::List(xs), SemType::List(t)) => {
                xs.iter().all(|x| x.has_type(t))
            }
            _ => false,
        }
    }

    /// Retags numbers to match `ty` where the payload allows it.
    pub fn coerce(self, ty: &SemType) -> Value {
        match (self, ty) {
            (Value::Nat(n), SemType::Int) => Value::Int(n),
            (Value::Int(n), SemType::Nat) if !n.is_negative() => Value::Nat(n),
            (Value::Pair(a, b), SemType::Pair(ta, tb)) => Value::pair(a.coerce(ta), b.coerce(tb)),
            (Value::Array(xs), SemType::Array(t)) => Value::Array(xs.into_iter().map(|x| x.coerce(t)).collect()),
            (Value::List(xs), SemType::List(t)) => Value::List(xs.into_iter().map(|x| x.coerce(t)).collect()),
            (v, _) => v,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_integer(&self) -> Option<&Integer> {
        match self {
            Value::Nat(n) | Value::Int(n) => Some(n),
            _ => None,
        }
    }

    /// Elements of a sequence; a Text yields its characters.
    pub fn elements(&self) -> Option<Vec<Value>> {
        match self {
            Value::Array(xs) | Value::List(xs) => Some(xs.clone()),
            Value::Text(s) => Some(s.chars().map(Value::Char).collect()),
            _ => None,
        }
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> Option<usize> {
        match self {
            Value::Array(xs) | Value::List(xs) => Some(xs.len()),
            Value::Text(s) => Some(s.chars().count()),
            _ => None,
        }
    }

    /// Rebuilds a sequence of the same kind as `self` from `elems`.
    pub fn with_elements(&self, elems: Vec<Value>) -> Value {
        match self {
            Value::List(_) => Value::List(elems),
            Value::Text(_) => Value::Text(
                elems
                    .into_iter()
                    .filter_map(|c| match c {
                        Value::Char(c) => Some(c),
                        _ => None,
                    })
                    .collect(),
            ),
            _ => Value::Array(elems),
        }
    }
}

fn write_seq(f: &mut fmt::Formatter<'_>, open: &str, xs: &[Value]) -> fmt::Result {
    f.write_str(open)?;
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{x}")?;
    }
    f.write_str("]")
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Nat(n) | Value::Int(n) => write!(f, "{n}"),
            Value::Char(c) => write!(f, "{c:?}"),
            Value::Text(s) => write!(f, "{s:?}"),
            Value::Pair(a, b) => write!(f, "({a}, {b})"),
            Value::Array(xs) => write_seq(f, "#[", xs),
            Value::List(xs) => write_seq(f, "[", xs),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_their_type() {
        for ty in [
            SemType::Bool,
            SemType::Nat,
            SemType::Int,
            SemType::Char,
            SemType::Text,
            SemType::pair(SemType::Nat, SemType::array(SemType::Bool)),
            SemType::list(SemType::Int),
        ] {
            assert!(Value::default_of(&ty).has_type(&ty), "{ty}");
        }
    }

    #[test]
    fn display_is_source_like() {
        let v = Value::pair(Value::Array(vec![Value::int(-1), Value::int(2)]), Value::Char('x'));
        assert_eq!(v.to_string(), "(#[-1, 2], 'x')");
        assert_eq!(Value::List(vec![Value::Bool(true)]).to_string(), "[true]");
    }

    #[test]
    fn negative_nat_is_ill_typed() {
        assert!(!Value::Nat((-1).into()).has_type(&SemType::Nat));
        assert_eq!(Value::Int(3.into()).coerce(&SemType::Nat), Value::nat(3));
    }
}
