use proptest::prelude::*;
use vtkit::gen::{GenConfig, Rng};
use vtkit::sem::{EvalOutcome, Value};
use vtkit::spectest::{
    check_uniqueness, load_cases, run_spec_suite, CheckVerdict, Inconclusive, SpecUnderTest, SuiteOptions, TestCase,
};
use vtkit::syntax::parse;

const WEAK: &str = include_str!("../fixtures/rotated_spec_weak.vt");
const CASES: &str = include_str!("../fixtures/rotated_cases.json");

const OFFSET: &str = "
def near_pre (x : Int) : Prop := x ≥ 0
def near_post (x : Int) (r : Int) : Prop := r = x ∨ r = x + 2 ∨ r > x + 25
";

#[test]
fn failures_replay() {
    let prog = parse(WEAK).unwrap();
    let spec = SpecUnderTest::resolve(&prog, "check_rotated").unwrap();
    let cases = load_cases(CASES, &spec).unwrap();
    let cfg = GenConfig::default();
    for seed in 0..20 {
        for case in &cases {
            if let CheckVerdict::Fail { output: Some(o) } = check_uniqueness(&spec, case, &Rng::new(seed), &cfg) {
                assert!(o.has_type(&spec.output.1));
                assert_ne!(o, case.expected);
                assert_eq!(spec.eval_post(&case.input, &o, cfg.fuel), EvalOutcome::True);
            }
        }
    }
}

#[test]
fn precondition_failure_short_circuits() {
    let prog = parse(OFFSET).unwrap();
    let spec = SpecUnderTest::resolve(&prog, "near").unwrap();
    let case = TestCase { input: vec![Value::int(-4)], expected: Value::int(-4) };
    let r = run_spec_suite(&spec, &[case], &Rng::new(0), &GenConfig::default(), SuiteOptions::default()).unwrap();
    let c = &r.cases[0];
    assert!(c.pre.is_fail());
    assert_eq!(c.post, CheckVerdict::Inconclusive(Inconclusive::Skipped));
    assert_eq!(c.uniqueness, CheckVerdict::Inconclusive(Inconclusive::Skipped));
}

proptest! {
    #[test]
    fn more_trials_never_turn_a_failure_into_a_pass(seed in 0u64..500, x in 0i64..20, k in 1u32..60, extra in 1u32..200) {
        let prog = parse(OFFSET).unwrap();
        let spec = SpecUnderTest::resolve(&prog, "near").unwrap();
        let case = TestCase { input: vec![Value::int(x)], expected: Value::int(x) };
        let run = |trials| check_uniqueness(&spec, &case, &Rng::new(seed), &GenConfig { trials, ..GenConfig::default() });
        let small = run(k);
        if small.is_fail() {
            prop_assert_eq!(small, run(k + extra));
        }
    }

    #[test]
    fn reports_are_deterministic(seed in any::<u64>()) {
        let prog = parse(WEAK).unwrap();
        let spec = SpecUnderTest::resolve(&prog, "check_rotated").unwrap();
        let cases = load_cases(CASES, &spec).unwrap();
        let cfg = GenConfig { trials: 50, ..GenConfig::default() };
        let run = || {
            let r = run_spec_suite(&spec, &cases, &Rng::new(seed), &cfg, SuiteOptions::default()).unwrap();
            serde_json::to_string(&r.to_json(&spec, &cases)).unwrap()
        };
        prop_assert_eq!(run(), run());
    }
}
