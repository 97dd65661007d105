//! SMT-LIB v2 encoding of verification conditions.
//!
//! Nat and Char become Int with range side conditions. A sequence binder `a`
//! becomes a length constant `a__len` and an uninterpreted function `a__at`;
//! reads outside `[0, a__len)` yield the element default. Definitions are
//! inlined. Quantifiers over Bool, and numeric quantifiers with small literal
//! bounds, are unrolled; other numeric quantifiers stay quantified.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use super::fold::fold;
use crate::num::Integer;
use crate::sem::bound::{candidates, Side, INLINE_DEPTH};
use crate::sem::{eval_expr, Env, Value};
use crate::syntax::visit::{free_vars, subst, subst1};
use crate::syntax::*;
use crate::syntax::print_expr;
use crate::vcgen::VerificationCondition;

/// Quantifier and countRange ranges up to this many points are unrolled.
pub const UNROLL_DEPTH: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("cannot encode {construct} at {span}")]
pub struct Unencodable {
    pub construct: String,
    pub span: Span,
}

type EResult<T> = Result<T, Unencodable>;

fn unencodable<T>(construct: impl Into<String>, span: Span) -> EResult<T> {
    Err(Unencodable { construct: construct.into(), span })
}

const RESERVED: &[&str] = &[
    "and", "or", "not", "ite", "let", "forall", "exists", "true", "false", "distinct", "div", "mod", "abs", "par",
    "as", "_", "!", "=>", "assert", "Int", "Bool",
];

/// A symbol, quoted with bars unless it is a plain SMT-LIB simple symbol.
pub fn symbol(name: &str) -> String {
    let simple = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c))
        && !RESERVED.contains(&name);
    if simple { name.to_string() } else { format!("|{}|", name.replace(['|', '\\'], "_")) }
}

fn int_lit(n: &Integer) -> String {
    if n.is_negative() { format!("(- {})", n.abs()) } else { n.to_string() }
}

fn is_numeral(s: &str) -> bool {
    s.chars().all(|c| c.is_ascii_digit()) || (s.starts_with("(- ") && s[3..s.len() - 1].chars().all(|c| c.is_ascii_digit()))
}

fn scalar(ty: &SemType) -> bool {
    matches!(ty, SemType::Bool | SemType::Nat | SemType::Int | SemType::Char)
}

fn sort(ty: &SemType) -> &'static str {
    if *ty == SemType::Bool { "Bool" } else { "Int" }
}

fn default_term(ty: &SemType) -> String {
    match Value::default_of(ty) {
        Value::Bool(b) => b.to_string(),
        Value::Char(c) => u32::from(c).to_string(),
        Value::Nat(n) | Value::Int(n) => int_lit(&n),
        _ => "0".into(),
    }
}

fn range_condition(term: &str, ty: &SemType) -> Option<String> {
    match ty {
        SemType::Nat => Some(format!("(>= {term} 0)")),
        SemType::Char => Some(format!("(and (>= {term} 0) (<= {term} 1114111))")),
        _ => None,
    }
}

#[derive(Clone)]
enum Binding {
    Scalar(String, SemType),
    Seq { len: String, at: String, elem: SemType },
    Pair(String, SemType, String, SemType),
}

struct Encoder<'p> {
    prog: &'p Program,
    unroll: usize,
    binders: HashMap<Ident, SemType>,
    declared: BTreeMap<Ident, Binding>,
    decls: Vec<String>,
    /// Quantified variables in scope, innermost last.
    scope: Vec<(Ident, SemType)>,
    inline: usize,
    /// Counting functions by canonical body text.
    counters: HashMap<String, String>,
    uf: bool,
    nonlinear: bool,
    quantified: bool,
}

impl Encoder<'_> {
    fn binding(&mut self, name: &Ident, span: Span) -> EResult<Binding> {
        if let Some(b) = self.declared.get(name) {
            return Ok(b.clone());
        }
        let Some(ty) = self.binders.get(name).cloned() else {
            return unencodable(format!("free variable `{name}`"), span);
        };
        let b = match &ty {
            t if scalar(t) => {
                let s = symbol(name);
                self.decls.push(format!("(declare-const {s} {})", sort(t)));
                if let Some(c) = range_condition(&s, t) {
                    self.decls.push(format!("(assert {c})"));
                }
                Binding::Scalar(s, ty.clone())
            }
            SemType::Text | SemType::Array(_) | SemType::List(_) => {
                let elem = ty.element().expect("sequence type");
                if !scalar(&elem) {
                    return unencodable(format!("sequence of {elem}"), span);
                }
                let len = symbol(&format!("{name}__len"));
                let at = symbol(&format!("{name}__at"));
                self.decls.push(format!("(declare-const {len} Int)"));
                self.decls.push(format!("(assert (>= {len} 0))"));
                self.decls.push(format!("(declare-fun {at} (Int) {})", sort(&elem)));
                Binding::Seq { len, at, elem }
            }
            SemType::Pair(a, b) if scalar(a) && scalar(b) => {
                let (x, y) = (symbol(&format!("{name}__1")), symbol(&format!("{name}__2")));
                for (s, t) in [(&x, &**a), (&y, &**b)] {
                    self.decls.push(format!("(declare-const {s} {})", sort(t)));
                    if let Some(c) = range_condition(s, t) {
                        self.decls.push(format!("(assert {c})"));
                    }
                }
                Binding::Pair(x, (**a).clone(), y, (**b).clone())
            }
            other => return unencodable(format!("binder of type {other}"), span),
        };
        self.declared.insert(name.clone(), b.clone());
        Ok(b)
    }

    fn seq(&mut self, e: &Expr) -> EResult<(String, String, SemType)> {
        match &e.kind {
            ExprKind::Var(x) if !self.scope.iter().any(|(n, _)| n == x) => match self.binding(x, e.span)? {
                Binding::Seq { len, at, elem } => {
                    self.uf = true;
                    Ok((len, at, elem))
                }
                _ => unencodable("non-sequence indexed", e.span),
            },
            _ => unencodable("sequence expression", e.span),
        }
    }

    fn closed_int(&self, e: &Expr) -> Option<Integer> {
        if !free_vars(e).is_empty() {
            return None;
        }
        let v = eval_expr(self.prog, &Env::new(), &fold(self.prog, e), 100_000).ok()?;
        v.as_integer().cloned()
    }

    fn unrolled_range(&self, q: Quantifier, var: &Ident, ty: &SemType, body: &Expr) -> Option<(Integer, Integer)> {
        let mut upper: Option<Integer> = None;
        let mut lower: Option<Integer> = if *ty == SemType::Nat { Some(Integer::ZERO) } else { None };
        for c in candidates(self.prog, q, var, body) {
            let Some(v) = self.closed_int(&c.expr) else { continue };
            let v = v.add(&c.shift);
            match c.side {
                Side::Upper => upper = Some(upper.map_or(v.clone(), |u| u.min(v))),
                Side::Lower => lower = Some(lower.map_or(v.clone(), |l| l.max(v))),
            }
        }
        let (lo, hi) = (lower?, upper?);
        let width = hi.sub(&lo).to_i64()?;
        (width <= self.unroll as i64).then_some((lo, hi))
    }

    fn quant(&mut self, e: &Expr, q: Quantifier, var: &Ident, ty: &SemType, body: &Expr) -> EResult<String> {
        let combine = |parts: Vec<String>| -> String {
            match (q, parts.len()) {
                (Quantifier::Forall, 0) => "true".into(),
                (Quantifier::Exists, 0) => "false".into(),
                (_, 1) => parts.into_iter().next().unwrap(),
                (Quantifier::Forall, _) => format!("(and {})", parts.join(" ")),
                (Quantifier::Exists, _) => format!("(or {})", parts.join(" ")),
            }
        };
        if *ty == SemType::Bool {
            let parts = [false, true]
                .into_iter()
                .map(|b| self.formula(&subst1(body, var, &Expr::bool(b))))
                .collect::<EResult<Vec<_>>>()?;
            return Ok(combine(parts));
        }
        if !matches!(ty, SemType::Nat | SemType::Int | SemType::Char) {
            return unencodable(format!("quantifier over {ty}"), e.span);
        }
        if ty.is_numeric() {
            if let Some((lo, hi)) = self.unrolled_range(q, var, ty, body) {
                let kind = if *ty == SemType::Nat { NumKind::Nat } else { NumKind::Int };
                let mut parts = Vec::new();
                let mut k = lo;
                while k < hi {
                    parts.push(self.formula(&subst1(body, var, &Expr::num(k.clone(), kind)))?);
                    k = k.add(&1.into());
                }
                return Ok(combine(parts));
            }
        }
        self.quantified = true;
        let s = symbol(var);
        self.scope.push((var.clone(), ty.clone()));
        let inner = self.formula(body);
        self.scope.pop();
        let inner = inner?;
        let guard = range_condition(&s, ty);
        Ok(match (q, guard) {
            (Quantifier::Forall, Some(g)) => format!("(forall (({s} Int)) (=> {g} {inner}))"),
            (Quantifier::Exists, Some(g)) => format!("(exists (({s} Int)) (and {g} {inner}))"),
            (Quantifier::Forall, None) => format!("(forall (({s} Int)) {inner})"),
            (Quantifier::Exists, None) => format!("(exists (({s} Int)) {inner})"),
        })
    }

    fn formula(&mut self, e: &Expr) -> EResult<String> {
        let (s, ty) = self.expr(e)?;
        if ty != SemType::Bool {
            return unencodable("non-boolean formula", e.span);
        }
        Ok(s)
    }

    fn expr(&mut self, e: &Expr) -> EResult<(String, SemType)> {
        let span = e.span;
        Ok(match &e.kind {
            ExprKind::Bool(b) => (b.to_string(), SemType::Bool),
            ExprKind::Num(n, k) => (int_lit(n), k.sem_type()),
            ExprKind::Char(c) => (u32::from(*c).to_string(), SemType::Char),
            ExprKind::Str(_) => return unencodable("string literal", span),
            ExprKind::Var(x) => {
                if let Some((_, t)) = self.scope.iter().rev().find(|(n, _)| n == x) {
                    return Ok((symbol(x), t.clone()));
                }
                match self.binding(x, span)? {
                    Binding::Scalar(s, t) => (s, t),
                    _ => return unencodable(format!("compound value `{x}`"), span),
                }
            }
            ExprKind::Unary(UnOp::Not, a) => (format!("(not {})", self.formula(a)?), SemType::Bool),
            ExprKind::Unary(UnOp::Neg, a) => (format!("(- {})", self.expr(a)?.0), SemType::Int),
            ExprKind::Binary(op, a, b) => self.binary(*op, a, b, span)?,
            ExprKind::Index { base, index, .. } => {
                let (len, at, el) = self.seq(base)?;
                let i = self.expr(index)?.0;
                (format!("(ite (and (<= 0 {i}) (< {i} {len})) ({at} {i}) {})", default_term(&el)), el)
            }
            ExprKind::Size(a) => match &a.kind {
                ExprKind::ArrayLit(xs) | ExprKind::ListLit(xs) => (xs.len().to_string(), SemType::Nat),
                ExprKind::Str(s) => (s.chars().count().to_string(), SemType::Nat),
                _ => (self.seq(a)?.0, SemType::Nat),
            },
            ExprKind::Proj(a, p) => match &a.kind {
                ExprKind::Var(x) => match self.binding(x, span)? {
                    Binding::Pair(s1, t1, s2, t2) => {
                        if *p == Proj::First { (s1, t1) } else { (s2, t2) }
                    }
                    _ => return unencodable("projection", span),
                },
                _ => return unencodable("projection", span),
            },
            ExprKind::ArrayLit(_) | ExprKind::ListLit(_) | ExprKind::Pair(..) => {
                return unencodable("compound literal", span);
            }
            ExprKind::Call(name, args) => {
                let Some(def) = self.prog.def(name) else {
                    return unencodable(format!("builtin `{name}`"), span);
                };
                if self.inline >= INLINE_DEPTH {
                    return unencodable(format!("`{name}` beyond inline depth {INLINE_DEPTH}"), span);
                }
                let map: HashMap<Ident, Expr> =
                    def.params.iter().map(|p| p.name.clone()).zip(args.iter().cloned()).collect();
                let body = subst(&def.body, &map);
                self.inline += 1;
                let r = self.expr(&body);
                self.inline -= 1;
                (r?.0, def.result.sem_type())
            }
            ExprKind::CountRange { var, lo, hi, body } => {
                let bounds = match (self.closed_int(lo), self.closed_int(hi)) {
                    (Some(l), Some(h)) if h.sub(&l).to_i64().is_some_and(|w| w <= self.unroll as i64) => Some((l, h)),
                    _ => None,
                };
                let Some((l, h)) = bounds else {
                    let f = self.counter(var, body, span)?;
                    let (lo, hi) = (self.expr(lo)?.0, self.expr(hi)?.0);
                    return Ok((format!("({f} {lo} {hi})"), SemType::Nat));
                };
                let mut parts = Vec::new();
                let mut k = l;
                while k < h {
                    let b = self.formula(&subst1(body, var, &Expr::num(k.clone(), NumKind::Nat)))?;
                    parts.push(format!("(ite {b} 1 0)"));
                    k = k.add(&1.into());
                }
                let s = match parts.len() {
                    0 => "0".to_string(),
                    1 => parts.pop().unwrap(),
                    _ => format!("(+ {})", parts.join(" ")),
                };
                (s, SemType::Nat)
            }
            ExprKind::Quant(q, var, ty, body) => (self.quant(e, *q, var, ty, body)?, SemType::Bool),
            ExprKind::Ite(c, a, b) => {
                let c = self.formula(c)?;
                let (x, tx) = self.expr(a)?;
                let (y, ty) = self.expr(b)?;
                let t = if tx == SemType::Nat && ty == SemType::Nat { tx } else if tx.is_numeric() { SemType::Int } else { tx };
                (format!("(ite {c} {x} {y})"), t)
            }
            ExprKind::Cast(a, ty) => (self.expr(a)?.0, ty.clone()),
        })
    }

    /// A function `f(lo, hi)` counting the `var` in `[lo, hi)` satisfying
    /// `body`, axiomatized by recursion on `hi`.
    fn counter(&mut self, var: &Ident, body: &Expr, span: Span) -> EResult<String> {
        let outer: Vec<Ident> = free_vars(body).into_iter().filter(|v| v != var).collect();
        if outer.iter().any(|v| self.scope.iter().any(|(n, _)| n == v)) {
            return unencodable("countRange under a quantifier", span);
        }
        let canon: Ident = "__k".into();
        let key = print_expr(&subst1(body, var, &Expr::var(&canon)));
        if let Some(f) = self.counters.get(&key) {
            return Ok(f.clone());
        }
        let f = format!("countRange__{}", self.counters.len());
        self.scope.push((canon.clone(), SemType::Nat));
        let b = self.formula(&subst1(body, var, &Expr::var(&canon)));
        self.scope.pop();
        let b = b?;
        self.decls.push(format!("(declare-fun {f} (Int Int) Int)"));
        self.decls.push(format!(
            "(assert (forall ((__lo Int) (__hi Int)) (! (= ({f} __lo __hi) (ite (<= __hi __lo) 0 \
             (+ ({f} __lo (- __hi 1)) (ite (let ((__k (- __hi 1))) {b}) 1 0)))) :pattern (({f} __lo __hi)))))"
        ));
        self.counters.insert(key, f.clone());
        self.uf = true;
        self.quantified = true;
        Ok(f)
    }

    fn binary(&mut self, op: BinOp, a: &Expr, b: &Expr, span: Span) -> EResult<(String, SemType)> {
        let (x, tx) = self.expr(a)?;
        let (y, ty) = self.expr(b)?;
        if !scalar(&tx) || !scalar(&ty) {
            return unencodable(format!("`{}` on compound values", op.symbol()), span);
        }
        let both_nat = tx == SemType::Nat && ty == SemType::Nat;
        let num = if both_nat { SemType::Nat } else { SemType::Int };
        let lit_y = is_numeral(&y);
        Ok(match op {
            BinOp::Add => (format!("(+ {x} {y})"), num),
            BinOp::Sub if both_nat => (format!("(ite (>= {x} {y}) (- {x} {y}) 0)"), num),
            BinOp::Sub => (format!("(- {x} {y})"), num),
            BinOp::Mul => {
                self.nonlinear |= !is_numeral(&x) && !lit_y;
                (format!("(* {x} {y})"), num)
            }
            BinOp::Div | BinOp::Mod => {
                let f = if op == BinOp::Div { "div" } else { "mod" };
                if lit_y && y != "0" {
                    (format!("({f} {x} {y})"), num)
                } else {
                    self.nonlinear = true;
                    let zero = if op == BinOp::Div { "0".to_string() } else { x.clone() };
                    (format!("(ite (= {y} 0) {zero} ({f} {x} {y}))"), num)
                }
            }
            BinOp::Eq | BinOp::Iff => (format!("(= {x} {y})"), SemType::Bool),
            BinOp::Ne => (format!("(not (= {x} {y}))"), SemType::Bool),
            BinOp::Lt => (format!("(< {x} {y})"), SemType::Bool),
            BinOp::Le => (format!("(<= {x} {y})"), SemType::Bool),
            BinOp::Gt => (format!("(> {x} {y})"), SemType::Bool),
            BinOp::Ge => (format!("(>= {x} {y})"), SemType::Bool),
            BinOp::And => (format!("(and {x} {y})"), SemType::Bool),
            BinOp::Or => (format!("(or {x} {y})"), SemType::Bool),
            BinOp::Implies => (format!("(=> {x} {y})"), SemType::Bool),
        })
    }
}

/// Encodes `vc` as a script whose answer is `unsat` exactly when the VC is
/// valid under the encoding.
pub fn emit_smtlib(prog: &Program, vc: &VerificationCondition) -> Result<String, Unencodable> {
    emit_smtlib_with(prog, vc, UNROLL_DEPTH)
}

pub fn emit_smtlib_with(prog: &Program, vc: &VerificationCondition, unroll: usize) -> Result<String, Unencodable> {
    let mut enc = Encoder {
        prog,
        unroll,
        binders: vc.binders.iter().cloned().collect(),
        declared: BTreeMap::new(),
        decls: Vec::new(),
        scope: Vec::new(),
        inline: 0,
        counters: HashMap::new(),
        uf: false,
        nonlinear: false,
        quantified: false,
    };
    let hyps = vc
        .hypotheses
        .iter()
        .map(|(n, h)| Ok((n.clone(), enc.formula(h)?)))
        .collect::<EResult<Vec<_>>>()?;
    let goal = enc.formula(&vc.goal)?;
    let logic = format!(
        "{}{}{}IA",
        if enc.quantified { "" } else { "QF_" },
        if enc.uf { "UF" } else { "" },
        if enc.nonlinear { "N" } else { "L" }
    );
    let mut out = String::new();
    let _ = writeln!(out, "; vc {}", vc.id);
    let _ = writeln!(out, "(set-logic {logic})");
    for d in &enc.decls {
        let _ = writeln!(out, "{d}");
    }
    for (n, h) in &hyps {
        let _ = writeln!(out, "; {n}");
        let _ = writeln!(out, "(assert {h})");
    }
    let _ = writeln!(out, "; goal");
    let _ = writeln!(out, "(assert (not {goal}))");
    let _ = writeln!(out, "(check-sat)");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, parse_expr_in};

    fn vc(prog: &Program, vars: &[(&str, SemType)], src: &str) -> VerificationCondition {
        let vars: Vec<(Ident, SemType)> = vars.iter().map(|(n, t)| ((*n).into(), t.clone())).collect();
        let (goal, _) = parse_expr_in(prog, &vars, src).unwrap();
        VerificationCondition {
            id: "T.t".into(),
            method: "T".into(),
            kind: crate::vcgen::VcKind::PostOnReturn,
            hypotheses: Vec::new(),
            goal,
            binders: vars,
            origin: Span::default(),
        }
    }

    #[test]
    fn reflexive_goal() {
        let prog = parse("").unwrap();
        let s = emit_smtlib(&prog, &vc(&prog, &[("n", SemType::Int)], "n = n")).unwrap();
        assert!(s.contains("(declare-const n Int)"));
        assert!(s.contains("(assert (not (= n n)))"));
        assert!(s.contains("(set-logic QF_LIA)"));
    }

    #[test]
    fn nat_side_conditions() {
        let prog = parse("").unwrap();
        let s = emit_smtlib(&prog, &vc(&prog, &[("i", SemType::Nat)], "i + 1 > i")).unwrap();
        assert!(s.contains("(assert (>= i 0))"));
        assert!(s.contains("(assert (not (> (+ i 1) i)))"));
    }

    #[test]
    fn arrays_and_quantifiers() {
        let prog = parse("").unwrap();
        let a = [("a", SemType::array(SemType::Int)), ("n", SemType::Nat)];
        let s = emit_smtlib(&prog, &vc(&prog, &a, "∀ i : Nat, i < a.size → a[i]! ≥ 0 ∨ n = 0")).unwrap();
        assert!(s.contains("(declare-fun a__at (Int) Int)"));
        assert!(s.contains("(forall ((i Int)) (=> (>= i 0)"));
        assert!(s.contains("(set-logic UFLIA)"));
        let s = emit_smtlib(&prog, &vc(&prog, &a, "∀ i : Nat, i < 3 → a[i]! = a[i]!")).unwrap();
        assert!(!s.contains("forall") && s.contains("QF_UFLIA"), "{s}");
    }

    #[test]
    fn recursion_beyond_inline_depth() {
        let prog = parse("def f (n : Nat) : Nat := if n = 0 then 0 else f(n - 1) + 1").unwrap();
        let err = emit_smtlib(&prog, &vc(&prog, &[("n", SemType::Nat)], "f(n) = n")).unwrap_err();
        assert!(err.construct.contains("inline depth"), "{err}");
        let err = emit_smtlib(&prog, &vc(&prog, &[("a", SemType::array(SemType::Nat))], "sum(a) ≥ 0")).unwrap_err();
        assert!(err.construct.contains("sum"));
    }

    #[test]
    fn symbolic_count_ranges_share_a_function() {
        let prog = parse("").unwrap();
        let a = [("a", SemType::array(SemType::Int)), ("n", SemType::Nat)];
        let src = "countRange(0, n, fun k => a[k]! < 0) ≤ countRange(0, n + 1, fun j => a[j]! < 0)";
        let s = emit_smtlib(&prog, &vc(&prog, &a, src)).unwrap();
        assert_eq!(s.matches("(declare-fun countRange__0 (Int Int) Int)").count(), 1, "{s}");
        assert!(!s.contains("countRange__1"));
    }

    #[test]
    fn quoting() {
        assert_eq!(symbol("x_1"), "x_1");
        assert_eq!(symbol("d'"), "|d'|");
        assert_eq!(symbol("and"), "|and|");
    }
}
