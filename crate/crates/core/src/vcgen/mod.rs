//! Verification conditions by forward symbolic execution.
//!
//! Each path through a method body is executed symbolically: locals are
//! mapped to expressions over the method parameters and fresh binders, and
//! branch conditions accumulate as named hypotheses. A loop is cut by its
//! invariants. The invariants must hold on arrival (entry), the variables the
//! body assigns are replaced by fresh binders (havoc), and the body is
//! executed once from an arbitrary state satisfying invariants and guard,
//! after which the invariants must hold again (preservation). Execution then
//! continues from the havocked state with the guard negated.

mod render;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::syntax::visit::{free_vars, subst};
use crate::syntax::*;

pub use render::render_vc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrectnessMode {
    Partial,
    Total,
}

impl fmt::Display for CorrectnessMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorrectnessMode::Partial => "partial",
            CorrectnessMode::Total => "total",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VcKind {
    InvariantEntry,
    InvariantPreserved,
    PostOnExit,
    PostOnReturn,
    MeasureDecreases,
    MeasureNonNegative,
}

impl fmt::Display for VcKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationCondition {
    pub id: String,
    pub method: Ident,
    pub kind: VcKind,
    /// Named hypotheses in path order.
    pub hypotheses: Vec<(String, Expr)>,
    pub goal: Expr,
    /// Universally quantified program state.
    pub binders: Vec<(Ident, SemType)>,
    /// Source position of the annotation or statement the VC comes from.
    pub origin: Span,
}

impl VerificationCondition {
    /// Builds a VC from a closed formula, lifting leading `∀` into binders and
    /// leading implications into hypotheses `h1`, `h2`, ...
    pub fn from_formula(id: &str, method: &str, f: &Expr) -> VerificationCondition {
        let mut binders = Vec::new();
        let mut hypotheses = Vec::new();
        let mut cur = f.clone();
        loop {
            match cur.kind {
                ExprKind::Quant(Quantifier::Forall, v, ty, body) if hypotheses.is_empty() => {
                    binders.push((v, ty));
                    cur = *body;
                }
                ExprKind::Binary(BinOp::Implies, a, b) => {
                    hypotheses.push((format!("h{}", hypotheses.len() + 1), *a));
                    cur = *b;
                }
                kind => {
                    cur = Expr::new(kind, cur.span);
                    break;
                }
            }
        }
        VerificationCondition {
            id: id.to_string(),
            method: method.into(),
            kind: VcKind::PostOnReturn,
            hypotheses,
            goal: cur,
            binders,
            origin: f.span,
        }
    }

    /// The VC as one closed formula: `∀ binders, h1 → ... → goal`.
    pub fn to_formula(&self) -> Expr {
        let body = self
            .hypotheses
            .iter()
            .rev()
            .fold(self.goal.clone(), |acc, (_, h)| Expr::binary(BinOp::Implies, h.clone(), acc));
        self.binders
            .iter()
            .rev()
            .fold(body, |acc, (v, t)| Expr::synth(ExprKind::Quant(Quantifier::Forall, v.clone(), t.clone(), Box::new(acc))))
    }

    /// `hypotheses → goal` without the binder prefix.
    pub fn implication(&self) -> Expr {
        let h = Expr::conj(self.hypotheses.iter().map(|(_, h)| h.clone()));
        if h.is_true_lit() {
            self.goal.clone()
        } else {
            Expr::binary(BinOp::Implies, h, self.goal.clone())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum VcGenError {
    #[error("no method named `{0}`")]
    UnknownMethod(String),
    #[error("{span}: loop in `{method}` has no `decreasing` clause (required in total mode)")]
    MissingDecreasing { method: String, span: Span },
    #[error("{span}: unsupported construct: {what}")]
    UnsupportedConstruct { what: String, span: Span },
}

#[derive(Clone)]
struct State {
    /// Symbolic value of each local assigned so far; parameters map to themselves.
    values: HashMap<Ident, Expr>,
    types: HashMap<Ident, SemType>,
    hyps: Vec<(String, Expr)>,
    binders: Vec<(Ident, SemType)>,
    after_loop: bool,
}

impl State {
    fn sym(&self, e: &Expr) -> Expr {
        subst(e, &self.values)
    }

    fn hyp(&mut self, base: &str, f: Expr) {
        if f.is_true_lit() {
            return;
        }
        let mut name = base.to_string();
        let mut k = 1;
        while self.hyps.iter().any(|(n, _)| *n == name) {
            name = format!("{base}_{k}");
            k += 1;
        }
        self.hyps.push((name, f));
    }

    fn scope(&self) -> Vec<(Ident, SemType)> {
        let mut v: Vec<_> = self.types.iter().map(|(k, t)| (k.clone(), t.clone())).collect();
        v.sort();
        v
    }
}

fn assigned(block: &[Stmt], out: &mut Vec<Ident>) {
    for s in block {
        match &s.kind {
            StmtKind::Assign { name, .. } => {
                if !out.contains(name) {
                    out.push(name.clone());
                }
            }
            StmtKind::If { then_block, else_block, .. } => {
                assigned(then_block, out);
                assigned(else_block, out);
            }
            StmtKind::While(lp) => assigned(&lp.body, out),
            _ => {}
        }
    }
}

struct Gen<'p> {
    prog: &'p Program,
    method: &'p Method,
    mode: CorrectnessMode,
    loops: Vec<&'p Loop>,
    visits: Vec<usize>,
    returns: usize,
    havoc_counter: HashMap<Ident, usize>,
    taken: BTreeSet<Ident>,
    out: Vec<VerificationCondition>,
}

impl<'p> Gen<'p> {
    fn emit(&mut self, id: String, kind: VcKind, st: &State, goal: Expr, origin: Span) {
        let mut binders = st.binders.clone();
        let mut fv: BTreeSet<Ident> = free_vars(&goal);
        for (_, h) in &st.hyps {
            fv.extend(free_vars(h));
        }
        binders.retain(|(b, _)| fv.contains(b) || self.method.params.iter().any(|p| p.name == *b));
        self.out.push(VerificationCondition {
            id,
            method: self.method.name.clone(),
            kind,
            hypotheses: st.hyps.clone(),
            goal,
            binders,
            origin,
        });
    }

    fn fresh(&mut self, name: &Ident) -> Ident {
        loop {
            let k = self.havoc_counter.entry(name.clone()).or_insert(0);
            *k += 1;
            let candidate: Ident = format!("{name}_{k}").into();
            if self.taken.insert(candidate.clone()) {
                return candidate;
            }
        }
    }

    fn block(&mut self, block: &'p [Stmt], states: Vec<State>) -> Result<Vec<State>, VcGenError> {
        let mut live = states;
        for s in block {
            let mut next = Vec::new();
            for st in live {
                next.extend(self.stmt(s, st)?);
            }
            live = next;
        }
        Ok(live)
    }

    fn stmt(&mut self, s: &'p Stmt, mut st: State) -> Result<Vec<State>, VcGenError> {
        match &s.kind {
            StmtKind::Let { name, ty, value, .. } => {
                let v = st.sym(value);
                st.values.insert(name.clone(), v);
                let ty = match ty {
                    Some(t) => t.clone(),
                    None => self.type_of(&st, value)?,
                };
                st.types.insert(name.clone(), ty);
                Ok(vec![st])
            }
            StmtKind::Assign { name, value } => {
                let v = st.sym(value);
                st.values.insert(name.clone(), v);
                Ok(vec![st])
            }
            StmtKind::If { cond, then_block, else_block } => {
                let c = st.sym(cond);
                let mut pos = st.clone();
                pos.hyp("if_pos", c.clone());
                let mut neg = st;
                neg.hyp("if_neg", Expr::not(c));
                let mut out = self.block(then_block, vec![pos])?;
                out.extend(self.block(else_block, vec![neg])?);
                Ok(out)
            }
            StmtKind::Return(values) => {
                let mut map = HashMap::new();
                for (p, v) in self.method.returns.iter().zip(values) {
                    map.insert(p.name.clone(), st.sym(v));
                }
                let goal = subst(&self.method.ensures_formula(), &map);
                let k = self.returns;
                self.returns += 1;
                let (suffix, kind) =
                    if st.after_loop { ("post_exit", VcKind::PostOnExit) } else { ("post", VcKind::PostOnReturn) };
                let id = format!("{}.p{k}.{suffix}", self.method.name);
                self.emit(id, kind, &st, goal, s.span);
                Ok(Vec::new())
            }
            StmtKind::While(lp) => self.while_loop(lp, st),
        }
    }

    fn type_of(&self, st: &State, e: &Expr) -> Result<SemType, VcGenError> {
        check_expr(self.prog, &st.scope(), e.clone(), None)
            .map(|(_, t)| t)
            .map_err(|err| VcGenError::UnsupportedConstruct { what: err.to_string(), span: e.span })
    }

    fn while_loop(&mut self, lp: &'p Loop, st: State) -> Result<Vec<State>, VcGenError> {
        let index = self.loops.iter().position(|l| std::ptr::eq(*l, lp)).unwrap_or(0);
        self.visits[index] += 1;
        let visit = self.visits[index];
        let method: &'p Method = self.method;
        let m = &method.name;
        let site = if visit == 1 { format!("{m}.L{}", index + 1) } else { format!("{m}.L{}.v{visit}", index + 1) };
        let labels = lp.labels();
        if self.mode == CorrectnessMode::Total && lp.decreasing.is_none() {
            return Err(VcGenError::MissingDecreasing { method: m.to_string(), span: lp.span });
        }

        for (inv, label) in lp.invariants.iter().zip(&labels) {
            self.emit(format!("{site}.{label}.entry"), VcKind::InvariantEntry, &st, st.sym(&inv.formula), inv.span);
        }

        let mut head = st;
        let mut modified = Vec::new();
        assigned(&lp.body, &mut modified);
        for x in &modified {
            let fresh = self.fresh(x);
            let ty = head.types.get(x).cloned().ok_or_else(|| VcGenError::UnsupportedConstruct {
                what: format!("assignment to `{x}` declared outside the method"),
                span: lp.span,
            })?;
            head.values.insert(x.clone(), Expr::var(&fresh));
            head.binders.push((fresh, ty));
        }
        for (inv, label) in lp.invariants.iter().zip(&labels) {
            let f = head.sym(&inv.formula);
            head.hyp(&format!("invariant_{label}"), f);
        }

        let mut body = head.clone();
        body.hyp("guard", head.sym(&lp.guard));
        let measure = match (&lp.decreasing, self.mode) {
            (Some(d), CorrectnessMode::Total) => {
                let m0 = body.sym(d);
                if self.type_of(&body, d)? == SemType::Int {
                    let zero = Expr::num(0, NumKind::Int);
                    let goal = Expr::binary(BinOp::Ge, m0.clone(), zero);
                    self.emit(format!("{site}.nonneg"), VcKind::MeasureNonNegative, &body, goal, d.span);
                }
                Some((d, m0))
            }
            _ => None,
        };
        let ends = self.block(&lp.body, vec![body])?;
        for (p, end) in ends.iter().enumerate() {
            for (inv, label) in lp.invariants.iter().zip(&labels) {
                let goal = end.sym(&inv.formula);
                self.emit(format!("{site}.p{p}.{label}.preserve"), VcKind::InvariantPreserved, end, goal, inv.span);
            }
            if let Some((d, m0)) = &measure {
                let goal = Expr::binary(BinOp::Lt, end.sym(d), m0.clone());
                self.emit(format!("{site}.p{p}.decreases"), VcKind::MeasureDecreases, end, goal, d.span);
            }
        }

        let mut exit = head;
        exit.hyp("done", Expr::not(exit.sym(&lp.guard)));
        exit.after_loop = true;
        Ok(vec![exit])
    }
}

/// Generates the verification conditions of `method`, in a stable order.
///
/// ```
/// use vtkit::vcgen::{generate_vcs, CorrectnessMode, VcKind};
///
/// let prog = vtkit::syntax::parse("method Id (n : Nat) return (r : Nat) ensures r = n do return n").unwrap();
/// let vcs = generate_vcs(&prog, "Id", CorrectnessMode::Partial).unwrap();
/// assert_eq!(vcs.len(), 1);
/// assert_eq!(vcs[0].kind, VcKind::PostOnReturn);
/// assert_eq!(vtkit::syntax::print_expr(&vcs[0].goal), "n = n");
/// ```
pub fn generate_vcs(
    prog: &Program,
    method: &str,
    mode: CorrectnessMode,
) -> Result<Vec<VerificationCondition>, VcGenError> {
    let m = prog.method(method).ok_or_else(|| VcGenError::UnknownMethod(method.to_string()))?;
    let loops = m.loops();
    let mut taken: BTreeSet<Ident> = m.params.iter().chain(&m.returns).map(|p| p.name.clone()).collect();
    collect_locals(&m.body, &mut taken);
    let mut st = State {
        values: HashMap::new(),
        types: m.params.iter().map(|p| (p.name.clone(), p.ty.clone())).collect(),
        hyps: Vec::new(),
        binders: m.params.iter().map(|p| (p.name.clone(), p.ty.clone())).collect(),
        after_loop: false,
    };
    for r in &m.requires {
        st.hyp("require", r.clone());
    }
    let mut g = Gen {
        prog,
        method: m,
        mode,
        visits: vec![0; loops.len()],
        loops,
        returns: 0,
        havoc_counter: HashMap::new(),
        taken,
        out: Vec::new(),
    };
    let ends = g.block(&m.body, vec![st])?;
    // Falling off the end is only possible for methods without results.
    for end in ends {
        let k = g.returns;
        g.returns += 1;
        let (suffix, kind) =
            if end.after_loop { ("post_exit", VcKind::PostOnExit) } else { ("post", VcKind::PostOnReturn) };
        g.emit(format!("{}.p{k}.{suffix}", m.name), kind, &end, m.ensures_formula(), m.span);
    }
    Ok(g.out)
}

fn collect_locals(block: &[Stmt], out: &mut BTreeSet<Ident>) {
    for s in block {
        match &s.kind {
            StmtKind::Let { name, .. } => {
                out.insert(name.clone());
            }
            StmtKind::If { then_block, else_block, .. } => {
                collect_locals(then_block, out);
                collect_locals(else_block, out);
            }
            StmtKind::While(lp) => collect_locals(&lp.body, out),
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const NON_PRIME: &str = include_str!("../../fixtures/is_non_prime.vt");
    const ROTATED: &str = include_str!("../../fixtures/rotated.vt");

    fn kinds(vcs: &[VerificationCondition]) -> Vec<VcKind> {
        vcs.iter().map(|v| v.kind).collect()
    }

    #[test]
    fn id_has_a_single_return_vc() {
        let prog = parse(include_str!("../../fixtures/id.vt")).unwrap();
        let vcs = generate_vcs(&prog, "Id", CorrectnessMode::Total).unwrap();
        assert_eq!(kinds(&vcs), vec![VcKind::PostOnReturn]);
        assert_eq!(vcs[0].id, "Id.p0.post");
        assert!(render_vc(&vcs[0]).contains("goal: n = n"));
    }

    #[test]
    fn non_prime_total_mode_covers_every_kind() {
        let prog = parse(NON_PRIME).unwrap();
        let vcs = generate_vcs(&prog, "IsNonPrime", CorrectnessMode::Total).unwrap();
        let ids: Vec<_> = vcs.iter().map(|v| v.id.as_str()).collect();
        assert_eq!(
            ids,
            vec![
                "IsNonPrime.p0.post",
                "IsNonPrime.L1.inv1.entry",
                "IsNonPrime.L1.inv2.entry",
                "IsNonPrime.L1.nonneg",
                "IsNonPrime.L1.p0.inv1.preserve",
                "IsNonPrime.L1.p0.inv2.preserve",
                "IsNonPrime.L1.p0.decreases",
                "IsNonPrime.L1.p1.inv1.preserve",
                "IsNonPrime.L1.p1.inv2.preserve",
                "IsNonPrime.L1.p1.decreases",
                "IsNonPrime.p1.post_exit",
            ]
        );
        let partial = generate_vcs(&prog, "IsNonPrime", CorrectnessMode::Partial).unwrap();
        assert!(partial.iter().all(|v| vcs.contains(v)));
        assert_eq!(partial.len(), vcs.len() - 3);
    }

    #[test]
    fn binders_cover_free_variables() {
        for (src, m) in [(NON_PRIME, "IsNonPrime"), (ROTATED, "CheckSortedAndRotated")] {
            let prog = parse(src).unwrap();
            for vc in generate_vcs(&prog, m, CorrectnessMode::Total).unwrap() {
                let mut fv = free_vars(&vc.goal);
                for (_, h) in &vc.hypotheses {
                    fv.extend(free_vars(h));
                }
                for v in fv {
                    assert!(vc.binders.iter().any(|(b, _)| *b == v), "{} misses {v}", vc.id);
                }
            }
        }
    }

    #[test]
    fn exit_vc_names_invariant_hypotheses() {
        let prog = parse(ROTATED).unwrap();
        let vcs = generate_vcs(&prog, "CheckSortedAndRotated", CorrectnessMode::Partial).unwrap();
        let exit = vcs.iter().find(|v| v.kind == VcKind::PostOnExit).unwrap();
        let text = render_vc(exit);
        assert!(text.contains("(invariant_inv_bounds : i_1 ≤ nums.size)"), "{text}");
        assert!(text.contains("(done : ¬i_1 < nums.size)"), "{text}");
    }

    #[test]
    fn total_mode_needs_measures() {
        let prog = parse("method M (n : Nat) do let mut i : Nat := 0 while i < n do i := i + 1 end end").unwrap();
        assert!(generate_vcs(&prog, "M", CorrectnessMode::Partial).is_ok());
        assert!(matches!(
            generate_vcs(&prog, "M", CorrectnessMode::Total),
            Err(VcGenError::MissingDecreasing { .. })
        ));
    }

    #[test]
    fn from_formula_lifts_binders_and_hypotheses() {
        let prog = parse("").unwrap();
        let (f, _) = parse_expr_in(&prog, &[], "∀ b : Bool, ∀ c : Bool, b → c → b").unwrap();
        let vc = VerificationCondition::from_formula("T.x", "T", &f);
        assert_eq!(vc.binders.len(), 2);
        assert_eq!(vc.hypotheses.len(), 2);
        assert_eq!(vc.to_formula(), f);
    }
}
