//! Property-based testing of methods and of individual VCs.
//!
//! [`test_method`] runs a method on random inputs that satisfy its
//! precondition, checking every loop invariant at loop entry and after each
//! iteration, the postcondition on return and, in total-correctness mode,
//! that the loop measure strictly decreases and is never negative.
//! [`test_vc`] samples binder assignments for a VC and looks for one that
//! satisfies the hypotheses but not the goal.

use rayon::prelude::*;

use crate::gen::{sample, sample_satisfying, shrink_tuple, Exhausted, GenConfig, Rng};
use crate::sem::{
    bind_params, eval_formula, run_method_with, Env, EvalOutcome, Halt, LoopSite, Monitor, Value,
};
use crate::syntax::{Ident, Method, Program, SemType};
use crate::vcgen::{CorrectnessMode, VerificationCondition};

/// Trials evaluated together before looking for the first failure.
const CHUNK: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FailureKind {
    InvariantAtEntry { label: String },
    InvariantNotPreserved { label: String, iteration: u64 },
    PostconditionFailed,
    MeasureViolated { iteration: u64 },
    /// Only reported in total-correctness mode.
    FuelExhausted,
}

impl FailureKind {
    /// The invariant label, or the name of the failed check.
    pub fn label(&self) -> &str {
        match self {
            FailureKind::InvariantAtEntry { label } | FailureKind::InvariantNotPreserved { label, .. } => label,
            FailureKind::PostconditionFailed => "postcondition",
            FailureKind::MeasureViolated { .. } => "decreasing",
            FailureKind::FuelExhausted => "fuel",
        }
    }

    /// Same check and label, ignoring iteration numbers.
    pub fn same_kind(&self, other: &FailureKind) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other) && self.label() == other.label()
    }
}

impl std::fmt::Display for FailureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FailureKind::InvariantAtEntry { label } => write!(f, "invariant \"{label}\" doesn't hold on loop entry"),
            FailureKind::InvariantNotPreserved { label, iteration } => {
                write!(f, "invariant \"{label}\" doesn't hold after iteration {iteration}")
            }
            FailureKind::PostconditionFailed => f.write_str("postcondition doesn't hold"),
            FailureKind::MeasureViolated { iteration } => {
                write!(f, "decreasing measure not decreasing or negative at iteration {iteration}")
            }
            FailureKind::FuelExhausted => f.write_str("fuel exhausted (possible non-termination)"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialFailure {
    pub kind: FailureKind,
    /// Shrunk input.
    pub input: Vec<Value>,
    /// Loop iterations completed when the failure occurred.
    pub trace: u64,
    /// Index of the trial that first failed.
    pub trial: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HarnessStatus {
    Pass,
    Fail,
    /// Too many trials were discarded.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HarnessReport {
    pub method: String,
    pub seed: u64,
    pub mode: CorrectnessMode,
    pub trials: u32,
    pub failures: Vec<TrialFailure>,
    /// Trials that ran out of fuel (partial mode) or could not be evaluated.
    pub discarded: u32,
    pub cfg: GenConfig,
}

impl HarnessReport {
    pub fn status(&self) -> HarnessStatus {
        if !self.failures.is_empty() {
            HarnessStatus::Fail
        } else if u64::from(self.discarded) * 10 > u64::from(self.trials) || self.trials == self.discarded {
            HarnessStatus::Inconclusive
        } else {
            HarnessStatus::Pass
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum HarnessError {
    #[error("no method named `{0}`")]
    UnknownMethod(String),
    #[error("precondition of `{method}`: {source}")]
    PreconditionExhausted { method: String, source: Exhausted },
}

#[derive(Clone, Copy, Debug, Default)]
pub struct HarnessOptions {
    /// Keep running after the first failure, collecting one failure per distinct check.
    pub keep_going: bool,
}

/// Result of one instrumented execution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TrialOutcome {
    Passed,
    Failed { kind: FailureKind, trace: u64 },
    Discarded(String),
}

struct Checker<'p> {
    prog: &'p Program,
    mode: CorrectnessMode,
    fuel: u64,
    /// Measure values at the head of the iterations in progress.
    heads: Vec<(usize, Value)>,
    iterations: u64,
    failure: Option<FailureKind>,
    undecided: Option<String>,
}

impl Checker<'_> {
    fn eval(&mut self, env: &Env, f: &crate::syntax::Expr) -> Option<bool> {
        match eval_formula(self.prog, env, f, self.fuel) {
            EvalOutcome::True => Some(true),
            EvalOutcome::False => Some(false),
            EvalOutcome::Error(_, d) => {
                self.undecided = Some(d);
                None
            }
        }
    }

    fn invariants(&mut self, env: &Env, site: &LoopSite<'_>, entry: bool) -> Result<(), Halt> {
        for (k, inv) in site.lp.invariants.iter().enumerate() {
            match self.eval(env, &inv.formula) {
                Some(true) => {}
                Some(false) => {
                    let label = site.lp.invariant_label(k);
                    self.failure = Some(if entry {
                        FailureKind::InvariantAtEntry { label }
                    } else {
                        FailureKind::InvariantNotPreserved { label, iteration: site.iteration }
                    });
                    return Err(Halt);
                }
                None => return Err(Halt),
            }
        }
        Ok(())
    }

    fn measure(&mut self, env: &Env, site: &LoopSite<'_>) -> Result<Option<Value>, Halt> {
        let Some(m) = site.lp.decreasing.as_ref().filter(|_| self.mode == CorrectnessMode::Total) else {
            return Ok(None);
        };
        match crate::sem::eval_expr(self.prog, env, m, self.fuel) {
            Ok(v) => Ok(Some(v)),
            Err(e) => {
                self.undecided = Some(e.to_string());
                Err(Halt)
            }
        }
    }
}

impl Monitor for Checker<'_> {
    fn loop_entry(&mut self, env: &Env, site: &LoopSite<'_>) -> Result<(), Halt> {
        self.invariants(env, site, true)
    }

    fn iteration_start(&mut self, env: &Env, site: &LoopSite<'_>) -> Result<(), Halt> {
        if let Some(v) = self.measure(env, site)? {
            if v.as_integer().is_some_and(|n| n.is_negative()) {
                self.failure = Some(FailureKind::MeasureViolated { iteration: site.iteration });
                return Err(Halt);
            }
            self.heads.push((site.index, v));
        }
        Ok(())
    }

    fn iteration_end(&mut self, env: &Env, site: &LoopSite<'_>) -> Result<(), Halt> {
        self.iterations += 1;
        self.invariants(env, site, false)?;
        if let Some(after) = self.measure(env, site)? {
            let before = match self.heads.pop() {
                Some((i, v)) if i == site.index => v,
                _ => return Ok(()),
            };
            let decreased = matches!((after.as_integer(), before.as_integer()), (Some(a), Some(b)) if a < b);
            if !decreased {
                self.failure = Some(FailureKind::MeasureViolated { iteration: site.iteration });
                return Err(Halt);
            }
        }
        Ok(())
    }
}

/// Runs `m` once on `input` with all checks enabled.
pub fn run_trial(prog: &Program, m: &Method, input: &[Value], mode: CorrectnessMode, cfg: &GenConfig) -> TrialOutcome {
    let mut checker =
        Checker { prog, mode, fuel: cfg.fuel, heads: Vec::new(), iterations: 0, failure: None, undecided: None };
    let result = run_method_with(prog, &m.name, input.to_vec(), cfg.fuel, &mut checker);
    let trace = checker.iterations;
    if let Some(kind) = checker.failure {
        return TrialOutcome::Failed { kind, trace };
    }
    if let Some(d) = checker.undecided {
        return TrialOutcome::Discarded(d);
    }
    let outputs = match result {
        Ok(vs) => vs,
        Err(e) if e.is_fuel() && mode == CorrectnessMode::Total => {
            return TrialOutcome::Failed { kind: FailureKind::FuelExhausted, trace };
        }
        Err(e) => return TrialOutcome::Discarded(e.to_string()),
    };
    let Ok(mut env) = bind_params(m, input.to_vec()) else {
        return TrialOutcome::Discarded("ill-typed input".into());
    };
    for (p, v) in m.returns.iter().zip(outputs) {
        env.bind(p.name.clone(), v, false);
    }
    match eval_formula(prog, &env, &m.ensures_formula(), cfg.fuel) {
        EvalOutcome::True => TrialOutcome::Passed,
        EvalOutcome::False => TrialOutcome::Failed { kind: FailureKind::PostconditionFailed, trace },
        EvalOutcome::Error(_, d) => TrialOutcome::Discarded(d),
    }
}

fn params(m: &Method) -> Vec<(Ident, SemType)> {
    m.params.iter().map(|p| (p.name.clone(), p.ty.clone())).collect()
}

fn shrink_failure(prog: &Program, m: &Method, input: &[Value], kind: &FailureKind, mode: CorrectnessMode, cfg: &GenConfig) -> (Vec<Value>, FailureKind, u64) {
    let pre = m.requires_formula();
    let names: Vec<Ident> = m.params.iter().map(|p| p.name.clone()).collect();
    let small = shrink_tuple(input, &mut |vs| {
        let env = Env::from_pairs(names.iter().cloned().zip(vs.iter().cloned()));
        eval_formula(prog, &env, &pre, cfg.fuel) == EvalOutcome::True
            && matches!(run_trial(prog, m, vs, mode, cfg), TrialOutcome::Failed { kind: k, .. } if k.same_kind(kind))
    });
    match run_trial(prog, m, &small, mode, cfg) {
        TrialOutcome::Failed { kind, trace } => (small, kind, trace),
        _ => unreachable!("shrinking preserves the failure"),
    }
}

/// Runs `cfg.trials` instrumented executions of `method`. Trial `t` samples
/// its input from `rng.fork(t)`, so the report does not depend on scheduling.
pub fn test_method(
    prog: &Program,
    method: &str,
    mode: CorrectnessMode,
    rng: &Rng,
    cfg: &GenConfig,
    opts: HarnessOptions,
) -> Result<HarnessReport, HarnessError> {
    let m = prog.method(method).ok_or_else(|| HarnessError::UnknownMethod(method.into()))?;
    let ps = params(m);
    let pre = m.requires_formula();
    let mut report = HarnessReport {
        method: method.into(),
        seed: rng.seed(),
        mode,
        trials: 0,
        failures: Vec::new(),
        discarded: 0,
        cfg: cfg.clone(),
    };
    let indices: Vec<u32> = (0..cfg.trials).collect();
    for chunk in indices.chunks(CHUNK) {
        let results: Vec<Result<(Vec<Value>, TrialOutcome), Exhausted>> = chunk
            .par_iter()
            .map(|&t| {
                let input = sample_satisfying(prog, &ps, &pre, &mut rng.fork(u64::from(t)), cfg)?;
                let out = run_trial(prog, m, &input, mode, cfg);
                Ok((input, out))
            })
            .collect();
        for (&t, r) in chunk.iter().zip(results) {
            let (input, out) =
                r.map_err(|source| HarnessError::PreconditionExhausted { method: method.into(), source })?;
            report.trials += 1;
            match out {
                TrialOutcome::Passed => {}
                TrialOutcome::Discarded(_) => report.discarded += 1,
                TrialOutcome::Failed { kind, .. } => {
                    if report.failures.iter().any(|f| f.kind.same_kind(&kind)) {
                        continue;
                    }
                    let (input, kind, trace) = shrink_failure(prog, m, &input, &kind, mode, cfg);
                    report.failures.push(TrialFailure { kind, input, trace, trial: t });
                    if !opts.keep_going {
                        return Ok(report);
                    }
                }
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VcVerdict {
    Pass,
    /// Binder values, in binder order.
    Fail(Vec<Value>),
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VcTestReport {
    pub verdict: VcVerdict,
    pub trials: u32,
    /// Assignments rejected by a hypothesis.
    pub vacuous: u32,
    /// Assignments on which a hypothesis or the goal could not be evaluated.
    pub undecided: u32,
}

enum Assignment {
    Vacuous,
    Undecided,
    Holds,
    Refutes,
}

fn judge(prog: &Program, vc: &VerificationCondition, vals: &[Value], fuel: u64) -> Assignment {
    let env = Env::from_pairs(vc.binders.iter().map(|(n, _)| n.clone()).zip(vals.iter().cloned()));
    for (_, h) in &vc.hypotheses {
        match eval_formula(prog, &env, h, fuel) {
            EvalOutcome::True => {}
            EvalOutcome::False => return Assignment::Vacuous,
            EvalOutcome::Error(..) => return Assignment::Undecided,
        }
    }
    match eval_formula(prog, &env, &vc.goal, fuel) {
        EvalOutcome::True => Assignment::Holds,
        EvalOutcome::False => Assignment::Refutes,
        EvalOutcome::Error(..) => Assignment::Undecided,
    }
}

/// Searches random binder assignments for a counterexample to `vc`.
/// Assignment `t` is drawn from `rng.fork(t)`.
pub fn test_vc(prog: &Program, vc: &VerificationCondition, rng: &Rng, cfg: &GenConfig) -> VcTestReport {
    let mut report = VcTestReport { verdict: VcVerdict::Inconclusive, trials: 0, vacuous: 0, undecided: 0 };
    let mut holds = 0u32;
    let indices: Vec<u32> = (0..cfg.trials).collect();
    for chunk in indices.chunks(CHUNK) {
        let results: Vec<(Vec<Value>, Assignment)> = chunk
            .par_iter()
            .map(|&t| {
                let mut r = rng.fork(u64::from(t));
                let vals: Vec<Value> = vc.binders.iter().map(|(_, ty)| sample(ty, &mut r, cfg)).collect();
                let a = judge(prog, vc, &vals, cfg.fuel);
                (vals, a)
            })
            .collect();
        for (vals, a) in results {
            report.trials += 1;
            match a {
                Assignment::Vacuous => report.vacuous += 1,
                Assignment::Undecided => report.undecided += 1,
                Assignment::Holds => holds += 1,
                Assignment::Refutes => {
                    let small = shrink_tuple(&vals, &mut |vs| {
                        matches!(judge(prog, vc, vs, cfg.fuel), Assignment::Refutes)
                    });
                    report.verdict = VcVerdict::Fail(small);
                    return report;
                }
            }
        }
    }
    if holds > 0 {
        report.verdict = VcVerdict::Pass;
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;
    use crate::vcgen::{generate_vcs, VcKind};

    const ROTATED: &str = include_str!("../fixtures/rotated.vt");
    const BAD: &str = include_str!("../fixtures/rotated_bad_invariant.vt");

    fn cfg(trials: u32) -> GenConfig {
        GenConfig { trials, ..GenConfig::default() }
    }

    #[test]
    fn correct_method_passes() {
        let prog = parse(ROTATED).unwrap();
        let r = test_method(&prog, "CheckSortedAndRotated", CorrectnessMode::Total, &Rng::new(0), &cfg(300), HarnessOptions::default())
            .unwrap();
        assert_eq!(r.status(), HarnessStatus::Pass, "{:?}", r.failures);
        assert_eq!(r.trials, 300);
    }

    #[test]
    fn mutated_invariant_is_named() {
        let prog = parse(BAD).unwrap();
        let r = test_method(&prog, "CheckSortedAndRotated", CorrectnessMode::Partial, &Rng::new(1), &cfg(500), HarnessOptions::default())
            .unwrap();
        assert_eq!(r.status(), HarnessStatus::Fail);
        let f = &r.failures[0];
        assert_eq!(f.kind.label(), "inv_drops_count");
        // replays to the same failure
        let m = prog.method("CheckSortedAndRotated").unwrap();
        let again = run_trial(&prog, m, &f.input, CorrectnessMode::Partial, &cfg(1));
        assert!(matches!(again, TrialOutcome::Failed { ref kind, .. } if kind == &f.kind));
    }

    #[test]
    fn wrong_body_fails_postcondition() {
        let src = ROTATED.replace("return drops ≤ 1", "return false");
        let prog = parse(&src).unwrap();
        let r = test_method(&prog, "CheckSortedAndRotated", CorrectnessMode::Partial, &Rng::new(2), &cfg(200), HarnessOptions::default())
            .unwrap();
        let f = &r.failures[0];
        assert_eq!(f.kind, FailureKind::PostconditionFailed);
        assert!(f.input[0].len().unwrap() <= 2, "{:?}", f.input);
    }

    #[test]
    fn measure_and_fuel_checks() {
        let src = "method Stay (n : Nat) return (r : Nat) do\n\
                   let mut i : Nat := 0\n\
                   while i < n invariant i ≤ n decreasing n do i := i + 1 end\n\
                   return i end\n\
                   method Spin (n : Nat) return (r : Nat) do\n\
                   while true decreasing n do end\n\
                   return n end";
        let prog = parse(src).unwrap();
        let c = GenConfig { fuel: 5000, ..cfg(50) };
        let r = test_method(&prog, "Stay", CorrectnessMode::Total, &Rng::new(0), &c, HarnessOptions::default()).unwrap();
        assert!(matches!(r.failures[0].kind, FailureKind::MeasureViolated { .. }));
        let r = test_method(&prog, "Stay", CorrectnessMode::Partial, &Rng::new(0), &c, HarnessOptions::default()).unwrap();
        assert_eq!(r.status(), HarnessStatus::Pass);
        let r = test_method(&prog, "Spin", CorrectnessMode::Partial, &Rng::new(0), &c, HarnessOptions::default()).unwrap();
        assert_eq!((r.status(), r.discarded), (HarnessStatus::Inconclusive, 50));
    }

    #[test]
    fn keep_going_collects_distinct_checks() {
        let src = "method Bad (n : Nat) return (r : Nat) ensures r > n do\n\
                   let mut i : Nat := 0\n\
                   while i < n invariant \"small\" i < 3 do i := i + 1 end\n\
                   return i end";
        let prog = parse(src).unwrap();
        let opts = HarnessOptions { keep_going: true };
        let r = test_method(&prog, "Bad", CorrectnessMode::Partial, &Rng::new(0), &cfg(200), opts).unwrap();
        let labels: Vec<_> = r.failures.iter().map(|f| f.kind.label().to_string()).collect();
        assert_eq!(labels.len(), 2, "{labels:?}");
        assert!(labels.contains(&"small".to_string()) && labels.contains(&"postcondition".to_string()));
    }

    #[test]
    fn unsatisfiable_precondition() {
        let prog = parse("method F (n : Nat) return (r : Nat) require n > 1000 do return n end").unwrap();
        let c = GenConfig { rejection_budget: 20, ..cfg(5) };
        let err = test_method(&prog, "F", CorrectnessMode::Partial, &Rng::new(0), &c, HarnessOptions::default());
        assert!(matches!(err, Err(HarnessError::PreconditionExhausted { .. })));
    }

    #[test]
    fn refutes_mutated_entry_vc() {
        let prog = parse(BAD).unwrap();
        let vcs = generate_vcs(&prog, "CheckSortedAndRotated", CorrectnessMode::Partial).unwrap();
        let entry = vcs.iter().find(|v| v.kind == VcKind::InvariantEntry && v.id.contains("inv_drops_count")).unwrap();
        let r = test_vc(&prog, entry, &Rng::new(0), &cfg(200));
        let VcVerdict::Fail(vals) = &r.verdict else { panic!("{r:?}") };
        assert!(matches!(judge(&prog, entry, vals, DEFAULT_FUEL), Assignment::Refutes));
        assert_eq!(vals[0].len(), Some(2));
    }

    #[test]
    fn vc_verdicts() {
        let prog = parse("").unwrap();
        let vc = |src: &str| {
            let (f, _) = crate::syntax::parse_expr_in(&prog, &[], src).unwrap();
            VerificationCondition::from_formula("t", "T", &f)
        };
        assert_eq!(test_vc(&prog, &vc("∀ n : Nat, n = n"), &Rng::new(0), &cfg(50)).verdict, VcVerdict::Pass);
        let vacuous = test_vc(&prog, &vc("∀ n : Nat, n > 1000 → n = 0"), &Rng::new(0), &cfg(50));
        assert_eq!((vacuous.verdict, vacuous.vacuous), (VcVerdict::Inconclusive, 50));
        let unbounded = test_vc(&prog, &vc("∀ n : Nat, (∃ k : Nat, k > n) → n = n"), &Rng::new(0), &cfg(20));
        assert_eq!((unbounded.verdict, unbounded.undecided), (VcVerdict::Inconclusive, 20));
        let r = test_vc(&prog, &vc("∀ n : Nat, n < 10 → n * n < 50"), &Rng::new(0), &cfg(200));
        assert_eq!(r.verdict, VcVerdict::Fail(vec![Value::nat(8)]));
    }

    use crate::sem::DEFAULT_FUEL;
}
