//! Specification testing: does a pre/postcondition pair accept the intended
//! behavior on concrete cases, and only that behavior?
//!
//! Each case goes through three checks in order. The precondition must hold
//! on the input; the postcondition must accept the expected output; and no
//! other output found by random search may satisfy the postcondition.
//! A failing check skips the ones after it.

use serde_json::{json, Value as Json};

use crate::gen::{mutant_stream, shrink, GenConfig, Rng};
use crate::sem::json::{from_json, to_json, DecodeError};
use crate::sem::{eval_formula, values_equal, Env, ErrorKind, EvalOutcome, Value};
use crate::syntax::{Expr, ExprKind, Ident, Program, SemType};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("no definition named `{0}`")]
    MissingDef(String),
    #[error("`{post}` must take the parameters of `{pre}` followed by one output parameter")]
    Shape { pre: String, post: String },
    #[error("no cases")]
    NoCases,
    #[error("malformed cases file: {0}")]
    Cases(String),
}

/// A precondition over the inputs and a postcondition over inputs and output.
#[derive(Clone, Debug)]
pub struct SpecUnderTest<'p> {
    pub prog: &'p Program,
    pub inputs: Vec<(Ident, SemType)>,
    pub output: (Ident, SemType),
    pub pre: Expr,
    pub post: Expr,
}

fn call(name: &Ident, args: &[(Ident, SemType)]) -> Expr {
    Expr::synth(ExprKind::Call(name.clone(), args.iter().map(|(n, _)| Expr::var(n)).collect()))
}

impl<'p> SpecUnderTest<'p> {
    /// Resolves `<name>_pre` and `<name>_post`.
    pub fn resolve(prog: &'p Program, name: &str) -> Result<SpecUnderTest<'p>, SpecError> {
        SpecUnderTest::from_defs(prog, &format!("{name}_pre"), &format!("{name}_post"))
    }

    /// Builds a spec from two Prop definitions. The postcondition's last
    /// parameter is the output; the others must match the precondition's.
    pub fn from_defs(prog: &'p Program, pre: &str, post: &str) -> Result<SpecUnderTest<'p>, SpecError> {
        let pre_def = prog.def(pre).ok_or_else(|| SpecError::MissingDef(pre.into()))?;
        let post_def = prog.def(post).ok_or_else(|| SpecError::MissingDef(post.into()))?;
        let shape = || SpecError::Shape { pre: pre.into(), post: post.into() };
        let (out, ins) = post_def.params.split_last().ok_or_else(shape)?;
        let types_match = ins.len() == pre_def.params.len() && ins.iter().zip(&pre_def.params).all(|(a, b)| a.ty == b.ty);
        if !types_match || pre_def.result.sem_type() != SemType::Bool || post_def.result.sem_type() != SemType::Bool {
            return Err(shape());
        }
        let inputs: Vec<(Ident, SemType)> = ins.iter().map(|p| (p.name.clone(), p.ty.clone())).collect();
        let mut all = inputs.clone();
        all.push((out.name.clone(), out.ty.clone()));
        Ok(SpecUnderTest {
            prog,
            pre: call(&pre_def.name, &inputs),
            post: call(&post_def.name, &all),
            output: (out.name.clone(), out.ty.clone()),
            inputs,
        })
    }

    fn env(&self, input: &[Value], output: Option<&Value>) -> Env {
        let mut env = Env::from_pairs(self.inputs.iter().map(|(n, _)| n.clone()).zip(input.iter().cloned()));
        if let Some(o) = output {
            env.bind(self.output.0.clone(), o.clone(), false);
        }
        env
    }

    pub fn eval_pre(&self, input: &[Value], fuel: u64) -> EvalOutcome {
        eval_formula(self.prog, &self.env(input, None), &self.pre, fuel)
    }

    pub fn eval_post(&self, input: &[Value], output: &Value, fuel: u64) -> EvalOutcome {
        eval_formula(self.prog, &self.env(input, Some(output)), &self.post, fuel)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestCase {
    pub input: Vec<Value>,
    pub expected: Value,
}

/// Decodes a JSON array of `{"input": [...], "expected": ...}` objects.
pub fn load_cases(text: &str, spec: &SpecUnderTest<'_>) -> Result<Vec<TestCase>, SpecError> {
    let bad = |m: String| SpecError::Cases(m);
    let j: Json = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    let items = j.as_array().ok_or_else(|| bad("expected an array of cases".into()))?;
    let decode = |e: DecodeError| bad(e.to_string());
    let mut cases = Vec::with_capacity(items.len());
    for (k, item) in items.iter().enumerate() {
        let input = item.get("input").and_then(Json::as_array).ok_or_else(|| bad(format!("case {k}: missing `input` array")))?;
        if input.len() != spec.inputs.len() {
            return Err(bad(format!("case {k}: expected {} input value(s), got {}", spec.inputs.len(), input.len())));
        }
        let input = input.iter().zip(&spec.inputs).map(|(v, (_, t))| from_json(v, t)).collect::<Result<_, _>>().map_err(decode)?;
        let expected = item.get("expected").ok_or_else(|| bad(format!("case {k}: missing `expected`")))?;
        let expected = from_json(expected, &spec.output.1).map_err(decode)?;
        cases.push(TestCase { input, expected });
    }
    Ok(cases)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Inconclusive {
    /// An earlier check failed or the check was switched off.
    Skipped,
    Unbounded(String),
    Error(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckVerdict {
    /// For uniqueness, `trials` counts the alternatives tried.
    Pass { trials: u32 },
    /// The violating output: the expected one for soundness, an alternative for uniqueness.
    Fail { output: Option<Value> },
    Inconclusive(Inconclusive),
}

impl CheckVerdict {
    fn from_outcome(o: EvalOutcome, output: Option<&Value>) -> CheckVerdict {
        match o {
            EvalOutcome::True => CheckVerdict::Pass { trials: 1 },
            EvalOutcome::False => CheckVerdict::Fail { output: output.cloned() },
            EvalOutcome::Error(kind, d) => CheckVerdict::Inconclusive(inconclusive(kind, d)),
        }
    }

    pub fn is_pass(&self) -> bool {
        matches!(self, CheckVerdict::Pass { .. })
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, CheckVerdict::Fail { .. })
    }

    fn to_json(&self, ty: &SemType) -> Json {
        match self {
            CheckVerdict::Pass { trials } => json!({ "status": "pass", "trials": trials }),
            CheckVerdict::Fail { output: None } => json!({ "status": "fail" }),
            CheckVerdict::Fail { output: Some(o) } => {
                json!({ "status": "fail", "counterexample": crate::sem::json::to_tagged(o, ty) })
            }
            CheckVerdict::Inconclusive(Inconclusive::Skipped) => json!({ "status": "skipped" }),
            CheckVerdict::Inconclusive(Inconclusive::Unbounded(d)) => {
                json!({ "status": "inconclusive", "reason": "unbounded_quantifier", "detail": d })
            }
            CheckVerdict::Inconclusive(Inconclusive::Error(d)) => {
                json!({ "status": "inconclusive", "reason": "error", "detail": d })
            }
        }
    }
}

fn inconclusive(kind: ErrorKind, detail: String) -> Inconclusive {
    match kind {
        ErrorKind::UnboundedQuantifier => Inconclusive::Unbounded(detail),
        _ => Inconclusive::Error(detail),
    }
}

const SKIPPED: CheckVerdict = CheckVerdict::Inconclusive(Inconclusive::Skipped);

pub fn check_pre(spec: &SpecUnderTest<'_>, case: &TestCase, cfg: &GenConfig) -> CheckVerdict {
    CheckVerdict::from_outcome(spec.eval_pre(&case.input, cfg.fuel), None)
}

pub fn check_post_sound(spec: &SpecUnderTest<'_>, case: &TestCase, cfg: &GenConfig) -> CheckVerdict {
    CheckVerdict::from_outcome(spec.eval_post(&case.input, &case.expected, cfg.fuel), Some(&case.expected))
}

/// Searches `cfg.trials` alternatives to the expected output for one the
/// postcondition also accepts. A pass is a bounded search result.
pub fn check_uniqueness(spec: &SpecUnderTest<'_>, case: &TestCase, rng: &Rng, cfg: &GenConfig) -> CheckVerdict {
    let ty = &spec.output.1;
    let expected = &case.expected;
    let accepts = |o: &Value| {
        !values_equal(o, expected) && spec.eval_post(&case.input, o, cfg.fuel) == EvalOutcome::True
    };
    let mut undecided = None;
    let mut tried = 0;
    for o in mutant_stream(ty, expected, cfg.trials as usize, rng, cfg) {
        if values_equal(&o, expected) {
            continue;
        }
        tried += 1;
        match spec.eval_post(&case.input, &o, cfg.fuel) {
            EvalOutcome::True => {
                let small = shrink(&o, &mut |c| accepts(c));
                return CheckVerdict::Fail { output: Some(small) };
            }
            EvalOutcome::False => {}
            EvalOutcome::Error(kind, d) => {
                undecided.get_or_insert_with(|| inconclusive(kind, d));
            }
        }
    }
    match undecided {
        Some(r) => CheckVerdict::Inconclusive(r),
        None if tried == 0 => CheckVerdict::Inconclusive(Inconclusive::Error("no alternative outputs".into())),
        None => CheckVerdict::Pass { trials: tried },
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseReport {
    pub pre: CheckVerdict,
    pub post: CheckVerdict,
    pub uniqueness: CheckVerdict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuiteStatus {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecReport {
    pub seed: u64,
    pub trials: u32,
    pub cases: Vec<CaseReport>,
}

impl SpecReport {
    pub fn status(&self) -> SuiteStatus {
        let checks = || self.cases.iter().flat_map(|c| [&c.pre, &c.post, &c.uniqueness]);
        if checks().any(CheckVerdict::is_fail) {
            SuiteStatus::Fail
        } else if checks().any(|c| !c.is_pass() && c != &SKIPPED) {
            SuiteStatus::Inconclusive
        } else {
            SuiteStatus::Pass
        }
    }

    pub fn to_json(&self, spec: &SpecUnderTest<'_>, cases: &[TestCase]) -> Json {
        let status = match self.status() {
            SuiteStatus::Pass => "pass",
            SuiteStatus::Fail => "fail",
            SuiteStatus::Inconclusive => "inconclusive",
        };
        let ty = &spec.output.1;
        let rows: Vec<Json> = self
            .cases
            .iter()
            .zip(cases)
            .enumerate()
            .map(|(k, (r, c))| {
                json!({
                    "case": k,
                    "input": c.input.iter().map(to_json).collect::<Vec<_>>(),
                    "expected": to_json(&c.expected),
                    "pre": r.pre.to_json(ty),
                    "post": r.post.to_json(ty),
                    "uniqueness": r.uniqueness.to_json(ty),
                })
            })
            .collect();
        json!({ "status": status, "seed": self.seed, "trials": self.trials, "cases": rows })
    }

    /// One line per case.
    pub fn summary(&self, spec: &SpecUnderTest<'_>) -> String {
        let mut out = String::new();
        for (k, c) in self.cases.iter().enumerate() {
            let line = if c.pre.is_fail() {
                "precondition rejects the input".to_string()
            } else if c.post.is_fail() {
                "postcondition rejects the expected output".to_string()
            } else if let CheckVerdict::Fail { output: Some(o) } = &c.uniqueness {
                format!("counterexample to uniqueness: {} = {o}", spec.output.0)
            } else if let Some(CheckVerdict::Inconclusive(r)) =
                [&c.pre, &c.post, &c.uniqueness].into_iter().find(|v| !v.is_pass() && *v != &SKIPPED)
            {
                format!("inconclusive: {r:?}")
            } else if let CheckVerdict::Pass { trials } = c.uniqueness {
                format!("ok (no alternative output accepted in {trials} trials)")
            } else {
                "ok (uniqueness skipped)".to_string()
            };
            out.push_str(&format!("case {k}: {line}\n"));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SuiteOptions {
    pub skip_uniqueness: bool,
}

/// Runs the three checks on every case. Case `k` draws from `rng.fork(k)`.
pub fn run_spec_suite(
    spec: &SpecUnderTest<'_>,
    cases: &[TestCase],
    rng: &Rng,
    cfg: &GenConfig,
    opts: SuiteOptions,
) -> Result<SpecReport, SpecError> {
    if cases.is_empty() {
        return Err(SpecError::NoCases);
    }
    let reports = cases
        .iter()
        .enumerate()
        .map(|(k, case)| {
            let pre = check_pre(spec, case, cfg);
            if !pre.is_pass() {
                return CaseReport { pre, post: SKIPPED, uniqueness: SKIPPED };
            }
            let post = check_post_sound(spec, case, cfg);
            if !post.is_pass() || opts.skip_uniqueness {
                return CaseReport { pre, post, uniqueness: SKIPPED };
            }
            let uniqueness = check_uniqueness(spec, case, &rng.fork(k as u64), cfg);
            CaseReport { pre, post, uniqueness }
        })
        .collect();
    Ok(SpecReport { seed: rng.seed(), trials: cfg.trials, cases: reports })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    const WEAK: &str = include_str!("../fixtures/rotated_spec_weak.vt");
    const STRONG: &str = include_str!("../fixtures/rotated_spec.vt");
    const CASES: &str = include_str!("../fixtures/rotated_cases.json");

    fn case() -> TestCase {
        TestCase { input: vec![Value::Array([1, 2, 3].map(Value::int).to_vec())], expected: Value::Bool(true) }
    }

    #[test]
    fn resolves_by_convention() {
        let prog = parse(WEAK).unwrap();
        let spec = SpecUnderTest::resolve(&prog, "check_rotated").unwrap();
        assert_eq!(spec.inputs.len(), 1);
        assert_eq!(&*spec.output.0, "result");
        assert_eq!(load_cases(CASES, &spec).unwrap(), vec![case()]);
        assert!(matches!(SpecUnderTest::resolve(&prog, "nope"), Err(SpecError::MissingDef(_))));
    }

    #[test]
    fn weak_spec_admits_false() {
        let prog = parse(WEAK).unwrap();
        let spec = SpecUnderTest::resolve(&prog, "check_rotated").unwrap();
        let cfg = GenConfig::default();
        let report = run_spec_suite(&spec, &[case()], &Rng::new(0), &cfg, SuiteOptions::default()).unwrap();
        assert_eq!(report.status(), SuiteStatus::Fail);
        let c = &report.cases[0];
        assert!(c.pre.is_pass() && c.post.is_pass());
        assert_eq!(c.uniqueness, CheckVerdict::Fail { output: Some(Value::Bool(false)) });
        // the witness replays
        assert_eq!(spec.eval_post(&case().input, &Value::Bool(false), cfg.fuel), EvalOutcome::True);
        assert!(report.summary(&spec).contains("result = false"));
    }

    #[test]
    fn biconditional_spec_passes() {
        let prog = parse(STRONG).unwrap();
        let spec = SpecUnderTest::resolve(&prog, "check_rotated").unwrap();
        let report =
            run_spec_suite(&spec, &[case()], &Rng::new(3), &GenConfig::default(), SuiteOptions::default()).unwrap();
        assert_eq!(report.status(), SuiteStatus::Pass);
    }

    #[test]
    fn checks_short_circuit() {
        let prog = parse(WEAK).unwrap();
        let spec = SpecUnderTest::resolve(&prog, "check_rotated").unwrap();
        let empty = TestCase { input: vec![Value::Array(vec![])], expected: Value::Bool(true) };
        let report =
            run_spec_suite(&spec, &[empty], &Rng::new(0), &GenConfig::default(), SuiteOptions::default()).unwrap();
        assert!(report.cases[0].pre.is_fail());
        assert_eq!(report.cases[0].post, SKIPPED);
        assert_eq!(report.cases[0].uniqueness, SKIPPED);
        assert!(matches!(
            run_spec_suite(&spec, &[], &Rng::new(0), &GenConfig::default(), SuiteOptions::default()),
            Err(SpecError::NoCases)
        ));
    }

    #[test]
    fn soundness_and_vacuous_specs() {
        let src = "def succ_pre (n : Nat) : Prop := true\n\
                   def succ_post (n : Nat) (result : Nat) : Prop := result = n + 1\n\
                   def any_pre (n : Nat) : Prop := true\n\
                   def any_post (n : Nat) (result : Nat) : Prop := true";
        let prog = parse(src).unwrap();
        let cfg = GenConfig::default();
        let succ = SpecUnderTest::resolve(&prog, "succ").unwrap();
        let wrong = TestCase { input: vec![Value::nat(2)], expected: Value::nat(2) };
        assert!(check_post_sound(&succ, &wrong, &cfg).is_fail());
        let right = TestCase { input: vec![Value::nat(2)], expected: Value::nat(3) };
        assert!(check_uniqueness(&succ, &right, &Rng::new(0), &cfg).is_pass());
        let any = SpecUnderTest::resolve(&prog, "any").unwrap();
        assert!(check_uniqueness(&any, &right, &Rng::new(0), &cfg).is_fail());
    }
}
