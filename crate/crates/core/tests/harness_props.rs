use proptest::prelude::*;
use vtkit::gen::{sample_satisfying, GenConfig, Rng};
use vtkit::harness::{run_trial, test_method, test_vc, HarnessOptions, TrialOutcome, VcVerdict};
use vtkit::sem::{eval_formula, run_method, Env, EvalOutcome};
use vtkit::syntax::{parse, parse_expr_in, Ident, Program, SemType};
use vtkit::vcgen::{generate_vcs, CorrectnessMode, VerificationCondition};

const ROTATED: &str = include_str!("../fixtures/rotated.vt");
const BAD: &str = include_str!("../fixtures/rotated_bad_invariant.vt");

/// Loop-free methods, some with wrong postconditions.
const PLAIN: &str = "
method Max (a : Int) (b : Int) return (m : Int)
  ensures m ≥ a ∧ m ≥ b
do
  if a < b then return b else return a end
end

method MaxFirst (a : Int) (b : Int) return (m : Int)
  ensures m ≥ a ∧ m ≥ b
do
  return a
end

method Half (n : Nat) return (r : Nat)
  require n % 2 = 0
  ensures r + r = n ∧ r < 9
do
  return n / 2
end
";

fn params(prog: &Program, method: &str) -> Vec<(Ident, SemType)> {
    prog.method(method).unwrap().params.iter().map(|p| (p.name.clone(), p.ty.clone())).collect()
}

/// Whether any of the first `trials` inputs the harness draws violates `ensures`.
fn violated_by_plain_execution(prog: &Program, method: &str, seed: u64, cfg: &GenConfig) -> bool {
    let m = prog.method(method).unwrap();
    let ps = params(prog, method);
    let pre = m.requires_formula();
    let rng = Rng::new(seed);
    (0..cfg.trials).any(|t| {
        let input = sample_satisfying(prog, &ps, &pre, &mut rng.fork(u64::from(t)), cfg).unwrap();
        let out = run_method(prog, method, input.clone(), cfg.fuel).unwrap();
        let mut env = Env::from_pairs(ps.iter().map(|(n, _)| n.clone()).zip(input));
        for (r, v) in m.returns.iter().zip(out) {
            env.bind(r.name.clone(), v, false);
        }
        eval_formula(prog, &env, &m.ensures_formula(), cfg.fuel) == EvalOutcome::False
    })
}

fn judge(prog: &Program, vc: &VerificationCondition, vals: &[vtkit::sem::Value]) -> (bool, EvalOutcome) {
    let env = Env::from_pairs(vc.binders.iter().map(|(n, _)| n.clone()).zip(vals.iter().cloned()));
    let hyps = vc.hypotheses.iter().all(|(_, h)| eval_formula(prog, &env, h, 1_000_000) == EvalOutcome::True);
    (hyps, eval_formula(prog, &env, &vc.goal, 1_000_000))
}

#[test]
fn vacuous_vcs_are_inconclusive() {
    let prog = parse("").unwrap();
    let vars = [(Ident::from("n"), SemType::Nat)];
    let f = parse_expr_in(&prog, &vars, "n < 0 → n = 7").unwrap().0;
    let mut vc = VerificationCondition::from_formula("V.v", "V", &f);
    vc.binders = vars.to_vec();
    let r = test_vc(&prog, &vc, &Rng::new(0), &GenConfig { trials: 100, ..GenConfig::default() });
    assert_eq!(r.verdict, VcVerdict::Inconclusive);
    assert_eq!((r.trials, r.vacuous), (100, 100));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn harness_agrees_with_plain_execution(seed in any::<u64>(), which in 0usize..3, trials in 1u32..80) {
        let prog = parse(PLAIN).unwrap();
        let method = ["Max", "MaxFirst", "Half"][which];
        let cfg = GenConfig { trials, ..GenConfig::default() };
        let r = test_method(&prog, method, CorrectnessMode::Total, &Rng::new(seed), &cfg, HarnessOptions::default()).unwrap();
        prop_assert_eq!(!r.failures.is_empty(), violated_by_plain_execution(&prog, method, seed, &cfg));
    }

    #[test]
    fn failures_replay(seed in any::<u64>(), keep_going in any::<bool>()) {
        let prog = parse(BAD).unwrap();
        let m = prog.method("CheckSortedAndRotated").unwrap();
        let cfg = GenConfig { trials: 100, ..GenConfig::default() };
        let opts = HarnessOptions { keep_going };
        for mode in [CorrectnessMode::Partial, CorrectnessMode::Total] {
            let r = test_method(&prog, &m.name, mode, &Rng::new(seed), &cfg, opts).unwrap();
            prop_assert!(r.trials >= 1 && r.trials <= cfg.trials);
            for f in &r.failures {
                prop_assert!(f.trial < r.trials);
                match run_trial(&prog, m, &f.input, mode, &cfg) {
                    TrialOutcome::Failed { kind, trace } => {
                        prop_assert_eq!(&kind, &f.kind);
                        prop_assert_eq!(trace, f.trace);
                    }
                    other => prop_assert!(false, "replay gave {:?}", other),
                }
            }
        }
    }

    #[test]
    fn refutations_are_real(seed in any::<u64>()) {
        let cfg = GenConfig { trials: 200, ..GenConfig::default() };
        for src in [ROTATED, BAD] {
            let prog = parse(src).unwrap();
            for vc in generate_vcs(&prog, "CheckSortedAndRotated", CorrectnessMode::Total).unwrap() {
                let r = test_vc(&prog, &vc, &Rng::new(seed).fork_key(&vc.id), &cfg);
                prop_assert!(r.verdict != VcVerdict::Pass || r.trials > r.vacuous + r.undecided);
                if let VcVerdict::Fail(vals) = &r.verdict {
                    prop_assert!(src == BAD, "{} refuted in the correct program", vc.id);
                    prop_assert_eq!(judge(&prog, &vc, vals), (true, EvalOutcome::False));
                }
            }
        }
    }
}
