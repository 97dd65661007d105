//! Tiered discharge of verification conditions.
//!
//! Each VC goes through the tiers in a fixed order and the first conclusive
//! one wins:
//!
//! 1. concrete evaluation after constant folding, when no binder survives;
//! 2. exhaustive enumeration, when every surviving binder has a small finite domain;
//! 3. random testing, which can only refute;
//! 4. an external SMT solver, trusted on `unsat`;
//! 5. otherwise the VC is residual and can be exported as an obligation file.

mod fold;
pub mod smt;
mod solver;

use std::collections::BTreeSet;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use serde_json::{json, Value as Json};
use sha2::{Digest, Sha256};

use crate::gen::{GenConfig, Rng};
use crate::harness::{test_vc, VcVerdict};
use crate::sem::json::to_tagged;
use crate::sem::{eval_formula, infer_bound, Env, EvalOutcome, Value};
use crate::syntax::visit::free_vars;
use crate::syntax::{Expr, ExprKind, Ident, Program, Quantifier, SemType};
use crate::vcgen::{generate_vcs, render_vc, CorrectnessMode, VcKind, VerificationCondition};

pub use fold::fold;
pub use smt::{emit_smtlib, Unencodable};
pub use solver::{run_solver, SolverAnswer, SolverCmd, SolverError, SolverRun};

#[derive(Clone, Debug, PartialEq)]
pub struct DispatchConfig {
    pub gen: GenConfig,
    pub seed: u64,
    /// Largest number of assignments the exhaustive tier enumerates.
    pub exhaustive_budget: u64,
    pub solver: Option<SolverCmd>,
    pub timeout: Duration,
    /// Worker threads; 0 picks a default.
    pub jobs: usize,
}

impl Default for DispatchConfig {
    fn default() -> DispatchConfig {
        DispatchConfig {
            gen: GenConfig::default(),
            seed: 0,
            exhaustive_budget: 10_000,
            solver: None,
            timeout: Duration::from_secs(10),
            jobs: 0,
        }
    }
}

impl DispatchConfig {
    /// The settings that influence results.
    pub fn to_json(&self) -> Json {
        json!({
            "trials": self.gen.trials,
            "size_bound": self.gen.size_bound,
            "int_magnitude": self.gen.int_magnitude,
            "rejection_budget": self.gen.rejection_budget,
            "fresh_ratio": self.gen.fresh_ratio,
            "fuel": self.gen.fuel,
            "exhaustive_budget": self.exhaustive_budget,
            "timeout_ms": self.timeout.as_millis() as u64,
            "solver": self.solver.as_ref().map(|s| s.to_string()),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tier {
    ConcreteEval,
    Exhaustive,
    Smt,
}

impl Tier {
    pub fn name(self) -> &'static str {
        match self {
            Tier::ConcreteEval => "concrete_eval",
            Tier::Exhaustive => "exhaustive",
            Tier::Smt => "smt",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Discharged(Tier),
    /// Binder values on which the hypotheses hold and the goal fails.
    Refuted(Vec<(Ident, SemType, Value)>),
    Residual,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DischargeOutcome {
    pub id: String,
    pub kind: VcKind,
    pub status: Status,
    /// `sha256:<hex>` of a solver transcript, or an obligation file name.
    pub evidence: Option<String>,
    /// Why a VC is residual.
    pub reason: Option<String>,
    /// Solver transcript, when one was run.
    pub transcript: Option<String>,
}

impl DischargeOutcome {
    fn new(vc: &VerificationCondition, status: Status) -> DischargeOutcome {
        DischargeOutcome { id: vc.id.clone(), kind: vc.kind, status, evidence: None, reason: None, transcript: None }
    }

    fn residual(vc: &VerificationCondition, reason: impl Into<String>) -> DischargeOutcome {
        DischargeOutcome { reason: Some(reason.into()), ..DischargeOutcome::new(vc, Status::Residual) }
    }

    pub fn to_json(&self) -> Json {
        let mut o = json!({ "id": self.id, "kind": self.kind.to_string() });
        let m = o.as_object_mut().expect("object");
        match &self.status {
            Status::Discharged(t) => {
                m.insert("status".into(), "discharged".into());
                m.insert("tier".into(), t.name().into());
            }
            Status::Refuted(a) => {
                m.insert("status".into(), "refuted".into());
                let cex: serde_json::Map<String, Json> =
                    a.iter().map(|(n, t, v)| (n.to_string(), to_tagged(v, t))).collect();
                m.insert("counterexample".into(), Json::Object(cex));
            }
            Status::Residual => {
                m.insert("status".into(), "residual".into());
            }
        }
        if let Some(e) = &self.evidence {
            m.insert("evidence".into(), e.clone().into());
        }
        if let Some(r) = &self.reason {
            m.insert("reason".into(), r.clone().into());
        }
        o
    }
}

/// `sha256:<hex>` of `text`.
pub fn text_hash(text: &str) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(text.as_bytes())))
}

fn assignment(vc: &VerificationCondition, chosen: &[(Ident, Value)]) -> Vec<(Ident, SemType, Value)> {
    vc.binders
        .iter()
        .map(|(n, t)| {
            let v = chosen.iter().find(|(c, _)| c == n).map_or_else(|| Value::default_of(t), |(_, v)| v.clone());
            (n.clone(), t.clone(), v)
        })
        .collect()
}

fn finite_domain(prog: &Program, var: &Ident, ty: &SemType, f: &Expr) -> Option<Vec<Value>> {
    match ty {
        SemType::Bool => Some(vec![Value::Bool(false), Value::Bool(true)]),
        SemType::Nat => {
            let q = Expr::synth(ExprKind::Quant(Quantifier::Forall, var.clone(), ty.clone(), Box::new(f.clone())));
            let hi = infer_bound(prog, &q, &Env::new())?.to_u64()?;
            Some((0..hi).map(Value::nat).collect())
        }
        _ => None,
    }
}

enum Enumerated {
    Valid,
    Counterexample(Vec<(Ident, Value)>),
    Unknown,
}

fn enumerate(prog: &Program, f: &Expr, vars: &[(Ident, Vec<Value>)], fuel: u64) -> Enumerated {
    let mut idx = vec![0usize; vars.len()];
    loop {
        let point: Vec<(Ident, Value)> = vars.iter().zip(&idx).map(|((n, d), &i)| (n.clone(), d[i].clone())).collect();
        match eval_formula(prog, &Env::from_pairs(point.iter().cloned()), f, fuel) {
            EvalOutcome::True => {}
            EvalOutcome::False => return Enumerated::Counterexample(point),
            EvalOutcome::Error(..) => return Enumerated::Unknown,
        }
        // odometer step
        let mut k = 0;
        loop {
            if k == vars.len() {
                return Enumerated::Valid;
            }
            idx[k] += 1;
            if idx[k] < vars[k].1.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Runs the tiers on one VC.
pub fn discharge(prog: &Program, vc: &VerificationCondition, cfg: &DispatchConfig) -> DischargeOutcome {
    let fuel = cfg.gen.fuel;
    let folded = fold(prog, &vc.implication());
    let live: Vec<(Ident, SemType)> = {
        let fv = free_vars(&folded);
        vc.binders.iter().filter(|(n, _)| fv.contains(n)).cloned().collect()
    };
    if live.is_empty() {
        match eval_formula(prog, &Env::new(), &folded, fuel) {
            EvalOutcome::True => return DischargeOutcome::new(vc, Status::Discharged(Tier::ConcreteEval)),
            EvalOutcome::False => return DischargeOutcome::new(vc, Status::Refuted(assignment(vc, &[]))),
            EvalOutcome::Error(..) => {}
        }
    }
    let domains: Option<Vec<(Ident, Vec<Value>)>> =
        live.iter().map(|(n, t)| finite_domain(prog, n, t, &folded).map(|d| (n.clone(), d))).collect();
    if let Some(domains) = domains.filter(|ds| !ds.is_empty()) {
        let points = domains.iter().try_fold(1u64, |acc, (_, d)| acc.checked_mul(d.len() as u64));
        if points.is_some_and(|p| p <= cfg.exhaustive_budget) {
            match enumerate(prog, &folded, &domains, fuel) {
                Enumerated::Valid => return DischargeOutcome::new(vc, Status::Discharged(Tier::Exhaustive)),
                Enumerated::Counterexample(p) => return DischargeOutcome::new(vc, Status::Refuted(assignment(vc, &p))),
                Enumerated::Unknown => {}
            }
        }
    }
    let rng = Rng::new(cfg.seed).fork_key(&vc.id);
    if let VcVerdict::Fail(vals) = test_vc(prog, vc, &rng, &cfg.gen).verdict {
        let chosen: Vec<(Ident, Value)> = vc.binders.iter().map(|(n, _)| n.clone()).zip(vals).collect();
        return DischargeOutcome::new(vc, Status::Refuted(assignment(vc, &chosen)));
    }
    let Some(cmd) = &cfg.solver else {
        return DischargeOutcome::residual(vc, "no solver configured");
    };
    let script = match emit_smtlib(prog, vc) {
        Ok(s) => s,
        Err(e) => return DischargeOutcome::residual(vc, e.to_string()),
    };
    match run_solver(cmd, &script, cfg.timeout) {
        Ok(run) => {
            let mut out = match run.answer {
                SolverAnswer::Unsat => DischargeOutcome::new(vc, Status::Discharged(Tier::Smt)),
                SolverAnswer::Sat => DischargeOutcome::residual(vc, "solver: sat"),
                SolverAnswer::Unknown => DischargeOutcome::residual(vc, "solver: unknown"),
                SolverAnswer::Timeout => DischargeOutcome::residual(vc, "solver: timeout"),
            };
            out.evidence = Some(text_hash(&run.transcript));
            out.transcript = Some(run.transcript);
            out
        }
        Err(SolverError::Unavailable(msg)) => DischargeOutcome::residual(vc, format!("solver unavailable: {msg}")),
        Err(SolverError::Failed { transcript }) => {
            let mut out = DischargeOutcome::residual(vc, "solver error");
            out.evidence = Some(text_hash(&transcript));
            out.transcript = Some(transcript);
            out
        }
    }
}

/// `<method>.<local id>.obligation.txt`; VC ids already start with the method name.
pub fn obligation_file_name(vc: &VerificationCondition) -> String {
    let prefix = format!("{}.", vc.method);
    let id = if vc.id.starts_with(&prefix) { vc.id.clone() } else { format!("{prefix}{}", vc.id) };
    format!("{id}.obligation.txt")
}

/// Writes the rendered VC, headed by where it came from.
pub fn export_residual(vc: &VerificationCondition, dir: &Path, source: Option<&str>) -> io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(obligation_file_name(vc));
    let text = format!(
        "-- source: {}:{}\n-- annotation at line {}, column {}\n{}",
        source.unwrap_or("<input>"),
        vc.origin.line,
        vc.origin.line,
        vc.origin.col,
        render_vc(vc)
    );
    std::fs::write(&path, text)?;
    Ok(path)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MethodVerdict {
    FullyProven,
    /// Residual VC ids.
    PartiallyProven(Vec<String>),
    /// The refuted VC id.
    Refuted(String),
    SynthesisFailure(String),
}

impl MethodVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            MethodVerdict::FullyProven => "fully_proven",
            MethodVerdict::PartiallyProven(_) => "partially_proven",
            MethodVerdict::Refuted(_) => "refuted",
            MethodVerdict::SynthesisFailure(_) => "synthesis_failure",
        }
    }

    /// Process exit code for the verdict.
    pub fn exit_code(&self) -> i32 {
        match self {
            MethodVerdict::FullyProven => 0,
            MethodVerdict::Refuted(_) => 1,
            MethodVerdict::SynthesisFailure(_) => 2,
            MethodVerdict::PartiallyProven(_) => 3,
        }
    }
}

/// The verdict for a set of outcomes; independent of their order.
pub fn verdict_of(outcomes: &[DischargeOutcome]) -> MethodVerdict {
    let ids = |p: fn(&Status) -> bool| -> BTreeSet<&String> {
        outcomes.iter().filter(|o| p(&o.status)).map(|o| &o.id).collect()
    };
    if let Some(id) = ids(|s| matches!(s, Status::Refuted(_))).into_iter().next() {
        return MethodVerdict::Refuted(id.clone());
    }
    let residual = ids(|s| *s == Status::Residual);
    if residual.is_empty() {
        MethodVerdict::FullyProven
    } else {
        MethodVerdict::PartiallyProven(residual.into_iter().cloned().collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub method: String,
    pub mode: CorrectnessMode,
    pub verdict: MethodVerdict,
    /// In generation order.
    pub outcomes: Vec<DischargeOutcome>,
    pub seed: u64,
    pub config: Json,
}

impl VerifyReport {
    pub fn failure(method: &str, mode: CorrectnessMode, cfg: &DispatchConfig, reason: String) -> VerifyReport {
        VerifyReport {
            method: method.into(),
            mode,
            verdict: MethodVerdict::SynthesisFailure(reason),
            outcomes: Vec::new(),
            seed: cfg.seed,
            config: cfg.to_json(),
        }
    }

    pub fn to_json(&self) -> Json {
        let mut o = json!({
            "version": env!("CARGO_PKG_VERSION"),
            "method": self.method,
            "mode": self.mode.to_string(),
            "verdict": self.verdict.name(),
        });
        let m = o.as_object_mut().expect("object");
        match &self.verdict {
            MethodVerdict::FullyProven => {}
            MethodVerdict::PartiallyProven(ids) => {
                m.insert("residual".into(), json!(ids));
            }
            MethodVerdict::Refuted(id) => {
                m.insert("refuted".into(), json!(id));
            }
            MethodVerdict::SynthesisFailure(r) => {
                m.insert("reason".into(), json!(r));
            }
        }
        m.insert("vcs".into(), Json::Array(self.outcomes.iter().map(DischargeOutcome::to_json).collect()));
        m.insert("seed".into(), json!(self.seed));
        m.insert("config".into(), self.config.clone());
        o
    }
}

/// Where residual obligations go, and the source name recorded in them.
#[derive(Clone, Copy, Debug, Default)]
pub struct Export<'a> {
    pub dir: Option<&'a Path>,
    pub source: Option<&'a str>,
}

/// Generates and discharges every VC of `method`.
pub fn verify_method(
    prog: &Program,
    method: &str,
    mode: CorrectnessMode,
    cfg: &DispatchConfig,
    export: Export<'_>,
) -> io::Result<VerifyReport> {
    let vcs = match generate_vcs(prog, method, mode) {
        Ok(v) => v,
        Err(e) => return Ok(VerifyReport::failure(method, mode, cfg, e.to_string())),
    };
    let run = || -> Vec<DischargeOutcome> { vcs.par_iter().map(|vc| discharge(prog, vc, cfg)).collect() };
    let mut outcomes = if cfg.jobs > 0 {
        match rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        }
    } else {
        run()
    };
    if let Some(dir) = export.dir {
        for (vc, o) in vcs.iter().zip(outcomes.iter_mut()) {
            if o.status == Status::Residual {
                let path = export_residual(vc, dir, export.source)?;
                o.evidence = path.file_name().map(|f| f.to_string_lossy().into_owned());
            }
        }
    }
    Ok(VerifyReport {
        method: method.into(),
        mode,
        verdict: verdict_of(&outcomes),
        outcomes,
        seed: cfg.seed,
        config: cfg.to_json(),
    })
}
