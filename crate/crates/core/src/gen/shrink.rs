use crate::num::Integer;
use crate::sem::Value;

/// Upper bound on accepted shrink steps.
pub const MAX_STEPS: usize = 1000;

fn integer_candidates(n: &Integer) -> Vec<Integer> {
    if n.is_zero() {
        return Vec::new();
    }
    let two = Integer::from(2);
    let mut out = vec![Integer::from(0)];
    if n.is_negative() {
        out.push(n.neg());
    }
    // halve toward zero
    let half = if n.is_negative() { n.neg().div_euclid(&two).neg() } else { n.div_euclid(&two) };
    if !half.is_zero() {
        out.push(half);
    }
    let step = if n.is_negative() { n.add(&1.into()) } else { n.sub(&1.into()) };
    if !step.is_zero() && !out.contains(&step) {
        out.push(step);
    }
    out
}

/// Strictly smaller variants of `v`, in the order they are tried.
pub fn candidates(v: &Value) -> Vec<Value> {
    match v {
        Value::Bool(true) => vec![Value::Bool(false)],
        Value::Bool(false) => Vec::new(),
        Value::Nat(n) => integer_candidates(n).into_iter().map(Value::Nat).collect(),
        Value::Int(n) => integer_candidates(n).into_iter().map(Value::Int).collect(),
        Value::Char(c) if *c != 'A' => vec![Value::Char('A')],
        Value::Char(_) => Vec::new(),
        Value::Pair(a, b) => {
            let mut out: Vec<Value> = candidates(a).into_iter().map(|x| Value::pair(x, (**b).clone())).collect();
            out.extend(candidates(b).into_iter().map(|y| Value::pair((**a).clone(), y)));
            out
        }
        Value::Text(_) | Value::Array(_) | Value::List(_) => {
            let xs = v.elements().unwrap_or_default();
            let n = xs.len();
            let mut out = Vec::new();
            if n == 0 {
                return out;
            }
            out.push(v.with_elements(Vec::new()));
            if n > 2 {
                out.push(v.with_elements(xs[..n / 2].to_vec()));
                out.push(v.with_elements(xs[n / 2..].to_vec()));
            }
            for i in 0..n {
                let mut ys = xs.clone();
                ys.remove(i);
                out.push(v.with_elements(ys));
            }
            for i in 0..n {
                for c in candidates(&xs[i]) {
                    let mut ys = xs.clone();
                    ys[i] = c;
                    out.push(v.with_elements(ys));
                }
            }
            out
        }
    }
}

/// Greedily shrinks `v` while `failing` keeps holding. `failing(v)` is
/// assumed true on entry.
pub fn shrink(v: &Value, failing: &mut dyn FnMut(&Value) -> bool) -> Value {
    let mut cur = v.clone();
    'outer: for _ in 0..MAX_STEPS {
        for c in candidates(&cur) {
            if failing(&c) {
                cur = c;
                continue 'outer;
            }
        }
        break;
    }
    cur
}

/// Shrinks a tuple of values one position at a time.
pub fn shrink_tuple(vs: &[Value], failing: &mut dyn FnMut(&[Value]) -> bool) -> Vec<Value> {
    let mut cur = vs.to_vec();
    let mut steps = 0;
    'outer: while steps < MAX_STEPS {
        for i in 0..cur.len() {
            for c in candidates(&cur[i]) {
                let mut next = cur.clone();
                next[i] = c;
                if failing(&next) {
                    cur = next;
                    steps += 1;
                    continue 'outer;
                }
            }
        }
        break;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shrinks_to_boundary() {
        let got = shrink(&Value::nat(1000), &mut |v| matches!(v, Value::Nat(n) if n >= &Integer::from(17)));
        assert_eq!(got, Value::nat(17));
        let got = shrink(&Value::int(-1000), &mut |v| matches!(v, Value::Int(n) if n <= &Integer::from(-5)));
        assert_eq!(got, Value::int(-5));
    }

    #[test]
    fn shrinks_collections() {
        let arr = Value::Array([9, 4, 7, 1, 8].map(Value::int).to_vec());
        // fails whenever some element exceeds 5
        let got = shrink(&arr, &mut |v| {
            v.elements().unwrap().iter().any(|x| matches!(x, Value::Int(n) if n > &Integer::from(5)))
        });
        assert_eq!(got, Value::Array(vec![Value::int(6)]));
    }

    #[test]
    fn tuple_positions_shrink_independently() {
        let got = shrink_tuple(&[Value::nat(40), Value::Bool(true)], &mut |vs| {
            matches!(&vs[0], Value::Nat(n) if n >= &Integer::from(3))
        });
        assert_eq!(got, vec![Value::nat(3), Value::Bool(false)]);
    }
}
