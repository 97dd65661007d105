use proptest::prelude::*;
use vtkit::gen::{mutant_stream, mutate, sample, sample_satisfying, shrink, GenConfig, Rng};
use vtkit::sem::{eval_formula, Env, EvalOutcome, Value};
use vtkit::syntax::{parse, parse_expr_in, Ident, SemType};

fn types() -> Vec<SemType> {
    vec![
        SemType::Bool,
        SemType::Nat,
        SemType::Int,
        SemType::Char,
        SemType::Text,
        SemType::pair(SemType::Int, SemType::Bool),
        SemType::pair(SemType::Nat, SemType::Nat),
        SemType::array(SemType::Int),
        SemType::list(SemType::Nat),
        SemType::array(SemType::pair(SemType::Int, SemType::Bool)),
        SemType::list(SemType::array(SemType::Char)),
    ]
}

#[test]
fn sample_and_mutate_preserve_types() {
    let cfg = GenConfig::default();
    for ty in types() {
        let mut rng = Rng::new(11);
        for _ in 0..10_000 {
            let v = sample(&ty, &mut rng, &cfg);
            assert!(v.has_type(&ty), "sample {v} : {ty}");
            let m = mutate(&ty, &v, &mut rng, &cfg);
            assert!(m.has_type(&ty), "mutate {v} -> {m} : {ty}");
        }
    }
}

fn leaves(v: &Value) -> Vec<Value> {
    match v {
        Value::Pair(a, b) => [leaves(a), leaves(b)].concat(),
        Value::Array(xs) | Value::List(xs) => xs.iter().flat_map(leaves).collect(),
        v => vec![v.clone()],
    }
}

/// True when `longer` is `shorter` with one element inserted.
fn one_insertion(shorter: &[Value], longer: &[Value]) -> bool {
    longer.len() == shorter.len() + 1 && (0..longer.len()).any(|k| [&longer[..k], &longer[k + 1..]].concat() == shorter)
}

#[test]
fn recursive_dispatch_changes_one_leaf_or_the_length() {
    let ty = SemType::array(SemType::pair(SemType::Int, SemType::Bool));
    let cfg = GenConfig::default();
    let mut rng = Rng::new(3);
    for _ in 0..10_000 {
        let v = sample(&ty, &mut rng, &cfg);
        let m = mutate(&ty, &v, &mut rng, &cfg);
        let (xs, ys) = (v.elements().unwrap(), m.elements().unwrap());
        if xs.len() == ys.len() {
            let changed = leaves(&v).iter().zip(leaves(&m).iter()).filter(|(a, b)| a != b).count();
            assert_eq!(changed, 1, "{v} -> {m}");
        } else {
            assert!(one_insertion(&xs, &ys) || one_insertion(&ys, &xs), "{v} -> {m}");
        }
    }
}

#[test]
fn mutant_stream_examples() {
    let cfg = GenConfig::default();
    let stream = mutant_stream(&SemType::Bool, &Value::Bool(true), 4, &Rng::new(0), &cfg);
    assert_eq!(stream.len(), 4);
    assert!(stream.iter().all(|v| *v == Value::Bool(false)));
    let arr = Value::Array((1..=3).map(Value::int).collect());
    let lens: Vec<usize> = (0..10)
        .flat_map(|s| mutant_stream(&SemType::array(SemType::Int), &arr, 50, &Rng::new(s), &cfg))
        .map(|v| v.len().unwrap())
        .collect();
    assert!(lens.contains(&2) && lens.contains(&4));
    let nats = mutant_stream(&SemType::Nat, &Value::nat(5u64), 10, &Rng::new(0), &cfg);
    assert_eq!(nats.len(), 10);
    assert!(nats.iter().all(|v| v.has_type(&SemType::Nat) && *v != Value::nat(5u64)));
}

#[test]
fn shrink_examples() {
    let head_nonzero = |v: &Value| v.len().unwrap() >= 1 && v.elements().unwrap()[0] != Value::int(0);
    let v = Value::Array([5, 0, 0].into_iter().map(Value::int).collect());
    let s = shrink(&v, &mut |c| head_nonzero(c));
    assert!(head_nonzero(&s));
    assert_eq!(s, Value::Array(vec![Value::int(1)]));
    assert_eq!(shrink(&Value::nat(41u64), &mut |_| true), Value::nat(0u64));
}

fn size(v: &Value) -> (usize, u64) {
    let len = match v {
        Value::Array(xs) | Value::List(xs) => xs.len(),
        Value::Text(s) => s.chars().count(),
        _ => 0,
    };
    let magnitude = leaves(v).iter().filter_map(|l| l.as_integer().map(|i| i.to_i64().unwrap().unsigned_abs())).sum();
    (len, magnitude)
}

proptest! {
    #[test]
    fn shrink_is_an_idempotent_descent(seed in any::<u64>(), threshold in 0i64..40) {
        let ty = SemType::array(SemType::Int);
        let v = sample(&ty, &mut Rng::new(seed), &GenConfig::default());
        let total = |c: &Value| c.elements().unwrap().iter().map(|x| x.as_integer().unwrap().to_i64().unwrap()).sum::<i64>();
        let mut failing = |c: &Value| total(c) >= threshold;
        prop_assume!(failing(&v));
        let once = shrink(&v, &mut failing);
        prop_assert!(failing(&once));
        prop_assert!(size(&once) <= size(&v));
        prop_assert_eq!(shrink(&once, &mut failing), once);
    }

    #[test]
    fn generation_is_a_function_of_the_seed(seed in any::<u64>(), which in 0usize..11) {
        let ty = &types()[which];
        let cfg = GenConfig::default();
        let a = sample(ty, &mut Rng::new(seed), &cfg);
        prop_assert_eq!(&a, &sample(ty, &mut Rng::new(seed), &cfg));
        prop_assert_eq!(mutate(ty, &a, &mut Rng::new(seed), &cfg), mutate(ty, &a, &mut Rng::new(seed), &cfg));
        let s = mutant_stream(ty, &a, 20, &Rng::new(seed), &cfg);
        prop_assert_eq!(&s, &mutant_stream(ty, &a, 20, &Rng::new(seed), &cfg));
        let prefix = mutant_stream(ty, &a, 7, &Rng::new(seed), &cfg);
        prop_assert_eq!(&s[..7], &prefix[..]);
    }

    #[test]
    fn conditioned_samples_satisfy_the_precondition(seed in any::<u64>(), which in 0usize..4) {
        let prog = parse("").unwrap();
        let params: Vec<(Ident, SemType)> =
            vec![("n".into(), SemType::Nat), ("b".into(), SemType::Bool), ("a".into(), SemType::array(SemType::Int))];
        let pre = ["n % 3 = 0 ∧ b", "a.size > 2 ∧ a[0]! < a[1]!", "∀ i : Nat, i < a.size → a[i]! ≥ 0", "n ≥ a.size"][which];
        let (f, _) = parse_expr_in(&prog, &params, pre).unwrap();
        let cfg = GenConfig::default();
        let vals = sample_satisfying(&prog, &params, &f, &mut Rng::new(seed), &cfg).unwrap();
        let env = Env::from_pairs(params.iter().map(|(n, _)| n.clone()).zip(vals));
        prop_assert_eq!(eval_formula(&prog, &env, &f, cfg.fuel), EvalOutcome::True);
    }
}
