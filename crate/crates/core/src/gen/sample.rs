use super::{GenConfig, Rng};
use crate::sem::{eval_formula, Env, EvalOutcome, Value};
use crate::syntax::{Expr, Ident, Program, SemType};

const PRINTABLE: (u32, u32) = (0x20, 0x7e);

pub(crate) fn printable(rng: &mut Rng) -> char {
    let (lo, hi) = PRINTABLE;
    char::from_u32(lo + rng.below(u64::from(hi - lo + 1)) as u32).unwrap_or('A')
}

/// Draws a random value of type `ty` within the configured bounds.
pub fn sample(ty: &SemType, rng: &mut Rng, cfg: &GenConfig) -> Value {
    let mag = cfg.int_magnitude.min(i64::MAX as u64) as i64;
    match ty {
        SemType::Bool => Value::Bool(rng.bool()),
        SemType::Nat => Value::nat(rng.between(0, mag)),
        SemType::Int => Value::int(rng.between(-mag, mag)),
        SemType::Char => Value::Char(printable(rng)),
        SemType::Text => {
            let len = rng.below(cfg.size_bound as u64 + 1);
            Value::Text((0..len).map(|_| printable(rng)).collect())
        }
        SemType::Pair(a, b) => {
            let x = sample(a, rng, cfg);
            Value::pair(x, sample(b, rng, cfg))
        }
        SemType::Array(t) | SemType::List(t) => {
            let len = rng.below(cfg.size_bound as u64 + 1);
            let xs = (0..len).map(|_| sample(t, rng, cfg)).collect();
            if matches!(ty, SemType::Array(_)) { Value::Array(xs) } else { Value::List(xs) }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("no input satisfying the precondition found in {attempts} attempts")]
pub struct Exhausted {
    pub accept_count: u32,
    pub attempts: u32,
}

/// Rejection-samples a tuple for `params` on which `pre` evaluates to true.
/// Draws that make `pre` false or fail to evaluate count as rejections.
pub fn sample_satisfying(
    prog: &Program,
    params: &[(Ident, SemType)],
    pre: &Expr,
    rng: &mut Rng,
    cfg: &GenConfig,
) -> Result<Vec<Value>, Exhausted> {
    for _ in 0..cfg.rejection_budget {
        let vals: Vec<Value> = params.iter().map(|(_, t)| sample(t, rng, cfg)).collect();
        if pre.is_true_lit() {
            return Ok(vals);
        }
        let env = Env::from_pairs(params.iter().map(|(n, _)| n.clone()).zip(vals.iter().cloned()));
        if eval_formula(prog, &env, pre, cfg.fuel) == EvalOutcome::True {
            return Ok(vals);
        }
    }
    Err(Exhausted { accept_count: 0, attempts: cfg.rejection_budget })
}
