//! Runtime semantics: values, the formula evaluator and the method interpreter.
//!
//! Arithmetic follows the usual proof-assistant conventions: Nat subtraction
//! truncates at zero, `x / 0 = 0`, `x % 0 = x`, and Int division is
//! Euclidean. Indexing past the end with `a[i]!` yields the element type's
//! default value. Quantifiers are evaluated by enumeration over a range
//! inferred from the formula (see [`bound`]); a quantifier without one is an
//! [`ErrorKind::UnboundedQuantifier`].

pub mod bound;
mod env;
mod eval;
mod interp;
pub mod json;
mod value;

pub use env::{AssignError, Env};
pub use eval::{
    arith, eval_expr, eval_formula, eval_pure, infer_bound, values_equal, ErrorKind, EvalError, EvalOutcome,
    Evaluator, Fuel, DEFAULT_FUEL, MAX_CALL_DEPTH,
};
pub use interp::{bind_params, run_method, run_method_with, Halt, LoopSite, Monitor, NoMonitor, RuntimeError};
pub use value::Value;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, parse_expr_in, Program, SemType};

    const NON_PRIME: &str = include_str!("../../fixtures/is_non_prime.vt");
    const ROTATED: &str = include_str!("../../fixtures/rotated.vt");

    fn ints(xs: &[i64]) -> Value {
        Value::Array(xs.iter().map(|x| Value::int(*x)).collect())
    }

    fn formula(prog: &Program, vars: &[(&str, SemType)], src: &str) -> crate::syntax::Expr {
        let vars: Vec<_> = vars.iter().map(|(n, t)| ((*n).into(), t.clone())).collect();
        let (f, ty) = parse_expr_in(prog, &vars, src).unwrap();
        assert_eq!(ty, SemType::Bool);
        f
    }

    // Independent oracles.
    fn is_prime(n: u64) -> bool {
        n > 1 && (2..n).all(|d| !n.is_multiple_of(d))
    }

    fn cyclic_drops(xs: &[i64]) -> usize {
        (0..xs.len()).filter(|&i| xs[(i + 1) % xs.len()] < xs[i]).count()
    }

    #[test]
    fn rotated_example_runs() {
        let prog = parse(ROTATED).unwrap();
        let out = run_method(&prog, "CheckSortedAndRotated", vec![ints(&[4, 1, 2, 3])], DEFAULT_FUEL);
        assert_eq!(out, Ok(vec![Value::Bool(true)]));
        let out = run_method(&prog, "CheckSortedAndRotated", vec![ints(&[2, 1, 3, 1])], DEFAULT_FUEL);
        assert_eq!(out, Ok(vec![Value::Bool(false)]));
    }

    #[test]
    fn non_prime_matches_trial_division() {
        let prog = parse(NON_PRIME).unwrap();
        for n in 0..=100u64 {
            let out = run_method(&prog, "IsNonPrime", vec![Value::nat(n)], DEFAULT_FUEL).unwrap();
            assert_eq!(out, vec![Value::Bool(!is_prime(n))], "n = {n}");
        }
    }

    #[test]
    fn count_divisors_matches_enumeration() {
        let prog = parse(NON_PRIME).unwrap();
        for n in 0..40u64 {
            let expected = (1..=n).filter(|d| n % d == 0).count();
            let got = eval_pure(&prog, "countDivisors", vec![Value::nat(n)], DEFAULT_FUEL).unwrap();
            assert_eq!(got, Value::nat(expected as u64), "n = {n}");
        }
        assert_eq!(eval_pure(&prog, "countDivisors", vec![Value::nat(6)], DEFAULT_FUEL), Ok(Value::nat(4)));
    }

    #[test]
    fn rot_sorted_prop_matches_drop_count() {
        let prog = parse(ROTATED).unwrap();
        let isdrop = eval_pure(&prog, "isDrop", vec![ints(&[4, 1, 2, 3]), Value::nat(0)], DEFAULT_FUEL);
        assert_eq!(isdrop, Ok(Value::Bool(true)));
        // every array over {0, 1, 2} up to length 5
        let mut arrays: Vec<Vec<i64>> = vec![vec![]];
        for len in 1..=5 {
            let mut next = Vec::new();
            for a in arrays.iter().filter(|a| a.len() == len - 1) {
                for x in 0..3 {
                    let mut b = a.clone();
                    b.push(x);
                    next.push(b);
                }
            }
            arrays.extend(next);
        }
        for a in &arrays {
            let expected = a.len() <= 1 || cyclic_drops(a) <= 1;
            let got = eval_pure(&prog, "rotSortedProp", vec![ints(a)], DEFAULT_FUEL);
            assert_eq!(got, Ok(Value::Bool(expected)), "{a:?}");
        }
    }

    #[test]
    fn bounded_existential_enumerates() {
        let prog = parse("").unwrap();
        let arr = [("arr", SemType::array(SemType::Int))];
        let f = formula(&prog, &arr, "∃ i : Nat, i < arr.size ∧ arr[i]! < 0");
        let env = Env::from_pairs([("arr", ints(&[1, -2]))]);
        assert_eq!(eval_formula(&prog, &env, &f, DEFAULT_FUEL), EvalOutcome::True);
        assert_eq!(infer_bound(&prog, &f, &env), Some(2.into()));
        let env = Env::from_pairs([("arr", ints(&[1, 2]))]);
        assert_eq!(eval_formula(&prog, &env, &f, DEFAULT_FUEL), EvalOutcome::False);
    }

    #[test]
    fn inclusive_bound_shifts_by_one() {
        let prog = parse("").unwrap();
        let f = formula(&prog, &[("n", SemType::Nat)], "∃ i : Nat, i ≤ n ∧ i = n");
        let env = Env::from_pairs([("n", Value::nat(5))]);
        assert_eq!(infer_bound(&prog, &f, &env), Some(6.into()));
        assert!(eval_formula(&prog, &env, &f, DEFAULT_FUEL).is_true());
    }

    #[test]
    fn unbounded_quantifiers_are_errors() {
        let prog = parse("").unwrap();
        let f = formula(&prog, &[], "∃ i : Nat, i > 5");
        assert!(matches!(
            eval_formula(&prog, &Env::new(), &f, DEFAULT_FUEL),
            EvalOutcome::Error(ErrorKind::UnboundedQuantifier, _)
        ));
        let g = formula(&prog, &[], "∀ i : Int, i < 3 → i < 4");
        assert!(matches!(
            eval_formula(&prog, &Env::new(), &g, DEFAULT_FUEL),
            EvalOutcome::Error(ErrorKind::UnboundedQuantifier, _)
        ));
        let h = formula(&prog, &[], "∀ i : Int, -2 ≤ i ∧ i < 3 → i * i ≤ 4");
        assert!(eval_formula(&prog, &Env::new(), &h, DEFAULT_FUEL).is_true());
    }

    #[test]
    fn bool_quantifiers_need_no_bound() {
        let prog = parse("").unwrap();
        let f = formula(&prog, &[], "∀ b : Bool, b ∨ ¬b");
        assert!(eval_formula(&prog, &Env::new(), &f, DEFAULT_FUEL).is_true());
    }

    #[test]
    fn arithmetic_conventions() {
        let prog = parse("").unwrap();
        for (src, expected) in [
            ("(3 : Nat) - 5 = 0", true),
            ("(7 : Nat) / 0 = 0", true),
            ("(7 : Nat) % 0 = 7", true),
            ("(-7 : Int) / 2 = -4", true),
            ("(-7 : Int) % 2 = 1", true),
            ("#[1, 2][5]! = 0", true),
            ("\"ab\".size = 2", true),
        ] {
            let f = formula(&prog, &[], src);
            assert_eq!(eval_formula(&prog, &Env::new(), &f, DEFAULT_FUEL).is_true(), expected, "{src}");
        }
    }

    #[test]
    fn fuel_bounds_loops() {
        let prog = parse(
            "method Spin (n : Nat) return (r : Nat) do let mut i : Nat := 0 while true do i := i + 1 end return i",
        )
        .unwrap();
        let err = run_method(&prog, "Spin", vec![Value::nat(0)], 1000).unwrap_err();
        assert!(err.is_fuel());
    }

    #[test]
    fn argument_checking() {
        let prog = parse(include_str!("../../fixtures/id.vt")).unwrap();
        assert!(matches!(run_method(&prog, "Id", vec![], 10), Err(RuntimeError::Arity { .. })));
        assert!(matches!(run_method(&prog, "Id", vec![Value::Bool(true)], 10), Err(RuntimeError::ArgType { .. })));
        assert_eq!(run_method(&prog, "Id", vec![Value::nat(5)], 10), Ok(vec![Value::nat(5)]));
    }
}
