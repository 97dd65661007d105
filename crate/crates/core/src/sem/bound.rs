//! Syntactic bound inference for quantified variables.
//!
//! An `∃ x, body` is searched for conjuncts that restrict `x` (`x < e`,
//! `x ≤ e`, `x + k < e`, `x = e`, and mirrored forms); a `∀ x, A → B` is
//! searched in the antecedent `A` instead. Such a conjunct is part of the
//! body itself, so every value outside the candidate range makes the body
//! false (for `∃`) or the implication vacuously true (for `∀`). Enumerating the
//! range is therefore exact, and no side proof that the bound is correct is
//! needed.

use crate::num::Integer;
use crate::syntax::visit::{free_vars, subst};
use crate::syntax::*;

/// Calls to Prop-valued definitions are unfolded up to this depth.
pub const INLINE_DEPTH: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Exclusive upper bound.
    Upper,
    /// Inclusive lower bound.
    Lower,
}

/// A bound of the form `expr + shift`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub side: Side,
    pub expr: Expr,
    pub shift: Integer,
}

struct Collector<'p> {
    prog: &'p Program,
    var: Ident,
    inner: Vec<Ident>,
    atoms: Vec<(Expr, Vec<Ident>)>,
}

fn unfold(prog: &Program, name: &str, args: &[Expr]) -> Option<Expr> {
    let def = prog.def(name)?;
    if def.result.sem_type() != SemType::Bool {
        return None;
    }
    let map = def.params.iter().map(|p| p.name.clone()).zip(args.iter().cloned()).collect();
    Some(subst(&def.body, &map))
}

impl Collector<'_> {
    fn push_atom(&mut self, e: &Expr) {
        self.atoms.push((e.clone(), self.inner.clone()));
    }

    fn conjuncts(&mut self, e: &Expr, q: Quantifier, depth: usize) {
        match &e.kind {
            ExprKind::Binary(BinOp::And, a, b) => {
                self.conjuncts(a, q, depth);
                self.conjuncts(b, q, depth);
            }
            ExprKind::Quant(Quantifier::Exists, y, _, body) if q == Quantifier::Exists && *y != self.var => {
                self.inner.push(y.clone());
                self.conjuncts(body, q, depth);
                self.inner.pop();
            }
            ExprKind::Call(f, args) if depth < INLINE_DEPTH => match unfold(self.prog, f, args) {
                Some(body) => self.conjuncts(&body, q, depth + 1),
                None => self.push_atom(e),
            },
            _ => self.push_atom(e),
        }
    }

    fn antecedents(&mut self, e: &Expr, depth: usize) {
        match &e.kind {
            ExprKind::Binary(BinOp::Implies, a, b) => {
                self.conjuncts(a, Quantifier::Forall, depth);
                self.antecedents(b, depth);
            }
            ExprKind::Binary(BinOp::Or, a, b) => {
                if let ExprKind::Unary(UnOp::Not, a) = &a.kind {
                    self.conjuncts(a, Quantifier::Forall, depth);
                    self.antecedents(b, depth);
                }
            }
            ExprKind::Quant(Quantifier::Forall, y, _, body) if *y != self.var => {
                self.inner.push(y.clone());
                self.antecedents(body, depth);
                self.inner.pop();
            }
            ExprKind::Call(f, args) if depth < INLINE_DEPTH => {
                if let Some(body) = unfold(self.prog, f, args) {
                    self.antecedents(&body, depth + 1);
                }
            }
            _ => {}
        }
    }
}

fn is_var(e: &Expr, x: &str) -> bool {
    matches!(&e.kind, ExprKind::Var(v) if &**v == x)
}

/// Recognises `x` or `x + k` / `k + x` with a literal `k`, returning the offset.
fn var_offset(e: &Expr, x: &str) -> Option<Integer> {
    if is_var(e, x) {
        return Some(Integer::ZERO);
    }
    match &e.kind {
        ExprKind::Binary(BinOp::Add, a, b) => match (&a.kind, &b.kind) {
            (_, ExprKind::Num(k, _)) if is_var(a, x) => Some(k.clone()),
            (ExprKind::Num(k, _), _) if is_var(b, x) => Some(k.clone()),
            _ => None,
        },
        _ => None,
    }
}

fn flip(op: BinOp) -> BinOp {
    match op {
        BinOp::Lt => BinOp::Gt,
        BinOp::Le => BinOp::Ge,
        BinOp::Gt => BinOp::Lt,
        BinOp::Ge => BinOp::Le,
        other => other,
    }
}

fn from_atom(atom: &Expr, x: &str, inner: &[Ident], out: &mut Vec<Candidate>) {
    let ExprKind::Binary(op, l, r) = &atom.kind else {
        return;
    };
    if !(op.is_comparison() && *op != BinOp::Ne) {
        return;
    }
    let (op, k, e) = if let Some(k) = var_offset(l, x) {
        (*op, k, r)
    } else if let Some(k) = var_offset(r, x) {
        (flip(*op), k, l)
    } else {
        return;
    };
    let fv = free_vars(e);
    if fv.iter().any(|v| &**v == x || inner.contains(v)) {
        return;
    }
    // x + k op e  ⇔  x op e - k
    let base = k.neg();
    let mut push = |side, extra: i64| {
        out.push(Candidate { side, expr: (**e).clone(), shift: base.add(&extra.into()) });
    };
    match op {
        BinOp::Lt => push(Side::Upper, 0),
        BinOp::Le => push(Side::Upper, 1),
        BinOp::Gt => push(Side::Lower, 1),
        BinOp::Ge => push(Side::Lower, 0),
        BinOp::Eq => {
            push(Side::Upper, 1);
            push(Side::Lower, 0);
        }
        _ => {}
    }
}

/// Candidate bounds for the variable of `q var, body`.
pub fn candidates(prog: &Program, q: Quantifier, var: &Ident, body: &Expr) -> Vec<Candidate> {
    let mut c = Collector { prog, var: var.clone(), inner: Vec::new(), atoms: Vec::new() };
    match q {
        Quantifier::Exists => c.conjuncts(body, q, 0),
        Quantifier::Forall => c.antecedents(body, 0),
    }
    let mut out = Vec::new();
    for (atom, inner) in &c.atoms {
        from_atom(atom, var, inner, &mut out);
    }
    out
}
