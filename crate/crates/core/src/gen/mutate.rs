use super::sample::{printable, sample};
use super::{GenConfig, Rng};
use crate::num::Integer;
use crate::sem::Value;
use crate::syntax::SemType;

fn delta(rng: &mut Rng) -> i64 {
    let d = rng.between(1, 3);
    if rng.bool() { d } else { -d }
}

fn shift_char(c: char, d: i64) -> char {
    let (lo, hi) = (0x20i64, 0x7ei64);
    let code = i64::from(u32::from(c));
    if !(lo..=hi).contains(&code) {
        return 'A';
    }
    let span = hi - lo + 1;
    let shifted = lo + (code - lo + d).rem_euclid(span);
    char::from_u32(shifted as u32).unwrap_or('A')
}

/// A nearby variant of `v`, which has type `ty`. The result always differs
/// from `v`.
pub fn mutate(ty: &SemType, v: &Value, rng: &mut Rng, cfg: &GenConfig) -> Value {
    match (ty, v) {
        (SemType::Bool, Value::Bool(b)) => Value::Bool(!b),
        (SemType::Nat, Value::Nat(n)) => {
            let d = delta(rng);
            let moved = n.add(&d.into());
            if moved.is_negative() {
                Value::Nat(n.add(&d.abs().into()))
            } else {
                Value::Nat(moved)
            }
        }
        (SemType::Int, Value::Int(n)) => {
            if !n.is_zero() && rng.below(4) == 0 {
                Value::Int(n.neg())
            } else {
                Value::Int(n.add(&Integer::from(delta(rng))))
            }
        }
        (SemType::Char, Value::Char(c)) => Value::Char(shift_char(*c, delta(rng))),
        (SemType::Pair(ta, tb), Value::Pair(a, b)) => {
            if ta == tb && a != b && rng.below(3) == 0 {
                return Value::pair((**b).clone(), (**a).clone());
            }
            if rng.bool() {
                Value::pair(mutate(ta, a, rng, cfg), (**b).clone())
            } else {
                Value::pair((**a).clone(), mutate(tb, b, rng, cfg))
            }
        }
        (SemType::Text | SemType::Array(_) | SemType::List(_), _) => {
            let elem = ty.element().unwrap_or(SemType::Char);
            let mut xs = v.elements().unwrap_or_default();
            // 0: element mutation, 1: deletion, 2: insertion
            let op = if xs.is_empty() { 2 } else { rng.below(3) };
            match op {
                0 => {
                    let i = rng.below(xs.len() as u64) as usize;
                    xs[i] = mutate(&elem, &xs[i], rng, cfg);
                }
                1 => {
                    let i = rng.below(xs.len() as u64) as usize;
                    xs.remove(i);
                }
                _ => {
                    let i = rng.below(xs.len() as u64 + 1) as usize;
                    let x = if elem == SemType::Char { Value::Char(printable(rng)) } else { sample(&elem, rng, cfg) };
                    xs.insert(i, x);
                }
            }
            v.with_elements(xs)
        }
        // value and type disagree: fall back to a fresh draw that differs
        _ => {
            for _ in 0..64 {
                let s = sample(ty, rng, cfg);
                if &s != v {
                    return s;
                }
            }
            Value::default_of(ty)
        }
    }
}

/// `k` candidate alternatives to `v`: a mix of fresh samples and mutants of `v`,
/// never equal to `v`. Candidate `i` depends only on `rng` and `i`, so a
/// longer stream extends a shorter one.
pub fn mutant_stream(ty: &SemType, v: &Value, k: usize, rng: &Rng, cfg: &GenConfig) -> Vec<Value> {
    let mut out = Vec::with_capacity(k);
    let limit = (k as u64).saturating_mul(20).max(64);
    for i in 0..limit {
        if out.len() == k {
            break;
        }
        let mut r = rng.fork(i);
        let c = if r.chance(cfg.fresh_ratio) { sample(ty, &mut r, cfg) } else { mutate(ty, v, &mut r, cfg) };
        if &c != v {
            out.push(c);
        }
    }
    out
}
