//! Name resolution and type checking.
//!
//! Checking also resolves the annotations the parser leaves as
//! placeholders: the kind of each numeric literal, the element type at each
//! `a[i]!`, and the type of every `let`. Integer literals take their type
//! from context and default to `Nat`, as in Lean.

use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::ParseError;

type CResult<T> = Result<T, ParseError>;

/// Builtin functions callable from any expression.
pub const BUILTINS: &[&str] = &["sum", "range", "push", "set", "countRange"];

fn type_error<T>(span: Span, expected: impl ToString, found: impl ToString) -> CResult<T> {
    Err(ParseError::Type {
        line: span.line,
        col: span.col,
        expected: expected.to_string(),
        found: found.to_string(),
    })
}

fn invalid<T>(span: Span, msg: impl Into<String>) -> CResult<T> {
    Err(ParseError::Invalid { line: span.line, col: span.col, msg: msg.into() })
}

fn unresolved<T>(span: Span, name: &str) -> CResult<T> {
    Err(ParseError::Unresolved { line: span.line, col: span.col, name: name.to_string() })
}

#[derive(Clone)]
struct Local {
    name: Ident,
    ty: SemType,
    mutable: bool,
}

#[derive(Clone, Default)]
struct Scope {
    locals: Vec<Local>,
}

impl Scope {
    fn lookup(&self, name: &str) -> Option<&Local> {
        self.locals.iter().rev().find(|l| &*l.name == name)
    }

    fn with(&self, name: &Ident, ty: SemType) -> Scope {
        let mut s = self.clone();
        s.locals.push(Local { name: name.clone(), ty, mutable: false });
        s
    }
}

struct Signature {
    params: Vec<Param>,
    result: SemType,
}

struct Checker {
    sigs: HashMap<Ident, Signature>,
    /// The definition whose body is being checked, for recursion checks.
    current: Option<Ident>,
}

/// True for expressions built only from literals, whose type is fixed by context.
fn literal_only(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Num(..) => true,
        ExprKind::Unary(UnOp::Neg, a) => literal_only(a),
        ExprKind::Binary(op, a, b) if op.is_arith() => literal_only(a) && literal_only(b),
        ExprKind::ArrayLit(xs) | ExprKind::ListLit(xs) => xs.iter().all(literal_only),
        ExprKind::Ite(_, a, b) => literal_only(a) && literal_only(b),
        _ => false,
    }
}

impl Checker {
    fn check(&mut self, e: &mut Expr, scope: &Scope, expected: &SemType) -> CResult<()> {
        let found = self.infer(e, scope, Some(expected))?;
        if &found != expected {
            return type_error(e.span, expected, found);
        }
        Ok(())
    }

    fn check_bool(&mut self, e: &mut Expr, scope: &Scope) -> CResult<()> {
        self.check(e, scope, &SemType::Bool)
    }

    /// Types two operands that must agree, letting a literal side adopt the other's type.
    fn operands(
        &mut self,
        lhs: &mut Expr,
        rhs: &mut Expr,
        scope: &Scope,
        hint: Option<&SemType>,
    ) -> CResult<SemType> {
        if literal_only(lhs) && !literal_only(rhs) {
            let t = self.infer(rhs, scope, hint)?;
            self.check(lhs, scope, &t)?;
            Ok(t)
        } else {
            let t = self.infer(lhs, scope, hint)?;
            self.check(rhs, scope, &t)?;
            Ok(t)
        }
    }

    fn sequence(&mut self, e: &mut Expr, scope: &Scope) -> CResult<(SemType, SemType)> {
        let t = self.infer(e, scope, None)?;
        match t.element() {
            Some(elem) => Ok((t, elem)),
            None => type_error(e.span, "Array, List or String", t),
        }
    }

    fn infer(&mut self, e: &mut Expr, scope: &Scope, expected: Option<&SemType>) -> CResult<SemType> {
        let span = e.span;
        let is_array = matches!(e.kind, ExprKind::ArrayLit(_));
        if let ExprKind::Var(name) = &e.kind {
            if scope.lookup(name).is_none() && self.sigs.get(name).is_some_and(|s| s.params.is_empty()) {
                e.kind = ExprKind::Call(name.clone(), Vec::new());
            }
        }
        match &mut e.kind {
            ExprKind::Bool(_) => Ok(SemType::Bool),
            ExprKind::Char(_) => Ok(SemType::Char),
            ExprKind::Str(_) => Ok(SemType::Text),
            ExprKind::Num(_, kind) => {
                *kind = match expected {
                    Some(SemType::Int) => NumKind::Int,
                    _ => NumKind::Nat,
                };
                Ok(kind.sem_type())
            }
            ExprKind::Var(name) => match scope.lookup(name) {
                Some(l) => Ok(l.ty.clone()),
                None => unresolved(span, name),
            },
            ExprKind::Unary(UnOp::Not, a) => {
                self.check_bool(a, scope)?;
                Ok(SemType::Bool)
            }
            ExprKind::Unary(UnOp::Neg, a) => {
                self.check(a, scope, &SemType::Int)?;
                Ok(SemType::Int)
            }
            ExprKind::Binary(op, a, b) => {
                let op = *op;
                if op.is_logical() {
                    self.check_bool(a, scope)?;
                    self.check_bool(b, scope)?;
                    return Ok(SemType::Bool);
                }
                if op.is_arith() {
                    let hint = expected.filter(|t| t.is_numeric());
                    let t = self.operands(a, b, scope, hint)?;
                    if !t.is_numeric() {
                        return type_error(span, "Nat or Int", t);
                    }
                    return Ok(t);
                }
                let t = self.operands(a, b, scope, None)?;
                if !matches!(op, BinOp::Eq | BinOp::Ne)
                    && !matches!(t, SemType::Nat | SemType::Int | SemType::Char)
                {
                    return type_error(span, "an ordered type (Nat, Int or Char)", t);
                }
                Ok(SemType::Bool)
            }
            ExprKind::Index { base, index, elem } => {
                let (_, el) = self.sequence(base, scope)?;
                self.check(index, scope, &SemType::Nat)?;
                *elem = el.clone();
                Ok(el)
            }
            ExprKind::Size(a) => {
                self.sequence(a, scope)?;
                Ok(SemType::Nat)
            }
            ExprKind::Proj(a, p) => match self.infer(a, scope, None)? {
                SemType::Pair(x, y) => Ok(if *p == Proj::First { *x } else { *y }),
                other => type_error(span, "a pair", other),
            },
            ExprKind::ArrayLit(xs) | ExprKind::ListLit(xs) => {
                let hint = expected.and_then(|t| match (t, is_array) {
                    (SemType::Array(el), true) | (SemType::List(el), false) => Some((**el).clone()),
                    _ => None,
                });
                let elem = match xs.split_first_mut() {
                    None => hint.unwrap_or(SemType::Nat),
                    Some((first, rest)) => {
                        let t = match rest.iter().position(|x| !literal_only(x)) {
                            Some(i) if literal_only(first) => {
                                let t = self.infer(&mut rest[i], scope, hint.as_ref())?;
                                self.check(first, scope, &t)?;
                                t
                            }
                            _ => self.infer(first, scope, hint.as_ref())?,
                        };
                        for x in rest.iter_mut() {
                            self.check(x, scope, &t)?;
                        }
                        t
                    }
                };
                Ok(if is_array { SemType::array(elem) } else { SemType::list(elem) })
            }
            ExprKind::Pair(a, b) => {
                let (ha, hb) = match expected {
                    Some(SemType::Pair(x, y)) => (Some((**x).clone()), Some((**y).clone())),
                    _ => (None, None),
                };
                let ta = self.infer(a, scope, ha.as_ref())?;
                let tb = self.infer(b, scope, hb.as_ref())?;
                Ok(SemType::pair(ta, tb))
            }
            ExprKind::Ite(c, a, b) => {
                self.check_bool(c, scope)?;
                self.operands(a, b, scope, expected)
            }
            ExprKind::Cast(a, ty) => {
                let target = ty.clone();
                let found = self.infer(a, scope, Some(&target))?;
                if found == target || (found == SemType::Nat && target == SemType::Int) {
                    Ok(target)
                } else {
                    type_error(span, target, found)
                }
            }
            ExprKind::CountRange { var, lo, hi, body } => {
                self.check(lo, scope, &SemType::Nat)?;
                self.check(hi, scope, &SemType::Nat)?;
                let inner = scope.with(var, SemType::Nat);
                self.check_bool(body, &inner)?;
                Ok(SemType::Nat)
            }
            ExprKind::Quant(_, var, ty, body) => {
                let inner = scope.with(var, ty.clone());
                self.check_bool(body, &inner)?;
                Ok(SemType::Bool)
            }
            ExprKind::Call(name, args) => {
                let name = name.clone();
                self.call(&name, args, scope, span)
            }
        }
    }

    fn call(&mut self, name: &Ident, args: &mut [Expr], scope: &Scope, span: Span) -> CResult<SemType> {
        let arity = |n: usize| -> CResult<()> {
            if args.len() != n {
                return invalid(span, format!("`{name}` expects {n} argument(s), got {}", args.len()));
            }
            Ok(())
        };
        match &**name {
            "sum" => {
                arity(1)?;
                let (t, elem) = self.sequence(&mut args[0], scope)?;
                if !elem.is_numeric() || t == SemType::Text {
                    return type_error(args[0].span, "a sequence of Nat or Int", t);
                }
                return Ok(elem);
            }
            "range" => {
                arity(2)?;
                self.check(&mut args[0], scope, &SemType::Nat)?;
                self.check(&mut args[1], scope, &SemType::Nat)?;
                return Ok(SemType::array(SemType::Nat));
            }
            "push" => {
                arity(2)?;
                let (t, elem) = self.sequence(&mut args[0], scope)?;
                self.check(&mut args[1], scope, &elem)?;
                return Ok(t);
            }
            "set" => {
                arity(3)?;
                let (t, elem) = self.sequence(&mut args[0], scope)?;
                self.check(&mut args[1], scope, &SemType::Nat)?;
                self.check(&mut args[2], scope, &elem)?;
                return Ok(t);
            }
            _ => {}
        }
        let Some(sig) = self.sigs.get(name) else {
            return unresolved(span, name);
        };
        let params = sig.params.clone();
        let result = sig.result.clone();
        arity(params.len())?;
        for (a, p) in args.iter_mut().zip(&params) {
            self.check(a, scope, &p.ty)?;
        }
        if self.current.as_ref() == Some(name) {
            let decreasing = args.iter().zip(&params).any(|(a, p)| match &a.kind {
                ExprKind::Binary(BinOp::Sub, x, c) => {
                    p.ty == SemType::Nat
                        && matches!(&x.kind, ExprKind::Var(v) if *v == p.name)
                        && matches!(&c.kind, ExprKind::Num(n, _) if *n > crate::num::Integer::ZERO)
                }
                _ => false,
            });
            if !decreasing {
                return invalid(
                    span,
                    format!("recursive call to `{name}` needs an argument of the form `param - k` (k > 0)"),
                );
            }
        }
        Ok(result)
    }

    fn check_def(&mut self, def: &mut PureDef) -> CResult<()> {
        let mut scope = Scope::default();
        let mut seen = HashSet::new();
        for p in &def.params {
            if !seen.insert(p.name.clone()) {
                return invalid(def.span, format!("duplicate parameter `{}`", p.name));
            }
            scope.locals.push(Local { name: p.name.clone(), ty: p.ty.clone(), mutable: false });
        }
        self.sigs.insert(
            def.name.clone(),
            Signature { params: def.params.clone(), result: def.result.sem_type() },
        );
        self.current = Some(def.name.clone());
        let r = self.check(&mut def.body, &scope, &def.result.sem_type());
        self.current = None;
        r
    }

    fn declare(&self, scope: &Scope, name: &Ident, span: Span) -> CResult<()> {
        if scope.lookup(name).is_some() {
            return invalid(span, format!("`{name}` is already declared"));
        }
        if self.sigs.contains_key(name) || BUILTINS.contains(&&**name) {
            return invalid(span, format!("`{name}` clashes with a definition"));
        }
        Ok(())
    }

    fn check_block(&mut self, block: &mut [Stmt], scope: &Scope, returns: &[Param]) -> CResult<()> {
        let mut scope = scope.clone();
        for stmt in block.iter_mut() {
            let span = stmt.span;
            match &mut stmt.kind {
                StmtKind::Let { name, mutable, ty, value } => {
                    self.declare(&scope, name, span)?;
                    let t = match ty {
                        Some(t) => {
                            self.check(value, &scope, t)?;
                            t.clone()
                        }
                        None => self.infer(value, &scope, None)?,
                    };
                    *ty = Some(t.clone());
                    scope.locals.push(Local { name: name.clone(), ty: t, mutable: *mutable });
                }
                StmtKind::Assign { name, value } => {
                    let Some(local) = scope.lookup(name).cloned() else {
                        return unresolved(span, name);
                    };
                    if !local.mutable {
                        return invalid(span, format!("cannot assign to immutable `{name}`"));
                    }
                    self.check(value, &scope, &local.ty)?;
                }
                StmtKind::If { cond, then_block, else_block } => {
                    self.check_bool(cond, &scope)?;
                    self.check_block(then_block, &scope, returns)?;
                    self.check_block(else_block, &scope, returns)?;
                }
                StmtKind::While(lp) => {
                    self.check_bool(&mut lp.guard, &scope)?;
                    for inv in lp.invariants.iter_mut() {
                        self.check_bool(&mut inv.formula, &scope)?;
                    }
                    let labels = lp.labels();
                    let mut seen = HashSet::new();
                    for (i, l) in labels.iter().enumerate() {
                        if !seen.insert(l) {
                            let s = lp.invariants[i].span;
                            return Err(ParseError::Syntax {
                                line: s.line,
                                col: s.col,
                                msg: format!("duplicate invariant label \"{l}\""),
                            });
                        }
                    }
                    if let Some(m) = &mut lp.decreasing {
                        let t = self.infer(m, &scope, None)?;
                        if !t.is_numeric() {
                            return type_error(m.span, "Nat or Int", t);
                        }
                    }
                    self.check_block(&mut lp.body, &scope, returns)?;
                }
                StmtKind::Return(values) => {
                    if values.len() != returns.len() {
                        return invalid(
                            span,
                            format!("return expects {} value(s), got {}", returns.len(), values.len()),
                        );
                    }
                    for (v, p) in values.iter_mut().zip(returns) {
                        self.check(v, &scope, &p.ty)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn check_method(&mut self, m: &mut Method) -> CResult<()> {
        let mut scope = Scope::default();
        for p in &m.params {
            self.declare(&scope, &p.name, m.span)?;
            scope.locals.push(Local { name: p.name.clone(), ty: p.ty.clone(), mutable: false });
        }
        for r in m.requires.iter_mut() {
            self.check_bool(r, &scope)?;
        }
        let mut post_scope = scope.clone();
        for p in &m.returns {
            self.declare(&post_scope, &p.name, m.span)?;
            post_scope.locals.push(Local { name: p.name.clone(), ty: p.ty.clone(), mutable: false });
        }
        for e in m.ensures.iter_mut() {
            self.check_bool(e, &post_scope)?;
        }
        let returns = m.returns.clone();
        self.check_block(&mut m.body, &scope, &returns)?;
        if !returns.is_empty() && !always_returns(&m.body) {
            return invalid(m.span, format!("method `{}` can finish without returning", m.name));
        }
        Ok(())
    }
}

/// Whether every path through `block` ends in `return`.
pub fn always_returns(block: &[Stmt]) -> bool {
    block.iter().any(|s| match &s.kind {
        StmtKind::Return(_) => true,
        StmtKind::If { then_block, else_block, .. } => always_returns(then_block) && always_returns(else_block),
        _ => false,
    })
}

/// Resolves names and types, filling in checker annotations.
pub fn check(mut prog: Program) -> Result<Program, ParseError> {
    let mut names = HashSet::new();
    let spans = prog.defs.iter().map(|d| (&d.name, d.span)).chain(prog.methods.iter().map(|m| (&m.name, m.span)));
    for (name, span) in spans {
        if BUILTINS.contains(&&**name) {
            return invalid(span, format!("`{name}` is a builtin"));
        }
        if !names.insert(name.clone()) {
            return invalid(span, format!("duplicate top-level name `{name}`"));
        }
    }
    let mut ck = Checker { sigs: HashMap::new(), current: None };
    for def in prog.defs.iter_mut() {
        ck.check_def(def)?;
    }
    for m in prog.methods.iter_mut() {
        ck.check_method(m)?;
    }
    Ok(prog)
}

/// Types a standalone expression against the definitions of `prog`, with
/// `vars` in scope. Returns the elaborated expression and its type.
pub fn check_expr(
    prog: &Program,
    vars: &[(Ident, SemType)],
    mut e: Expr,
    expected: Option<&SemType>,
) -> Result<(Expr, SemType), ParseError> {
    let mut ck = Checker { sigs: HashMap::new(), current: None };
    for d in &prog.defs {
        ck.sigs.insert(d.name.clone(), Signature { params: d.params.clone(), result: d.result.sem_type() });
    }
    let mut scope = Scope::default();
    for (name, ty) in vars {
        scope.locals.push(Local { name: name.clone(), ty: ty.clone(), mutable: false });
    }
    let ty = match expected {
        Some(t) => {
            ck.check(&mut e, &scope, t)?;
            t.clone()
        }
        None => ck.infer(&mut e, &scope, None)?,
    };
    Ok((e, ty))
}

#[cfg(test)]
mod tests {
    use crate::syntax::{parse, ParseError};

    fn err(src: &str) -> ParseError {
        parse(src).expect_err("should fail")
    }

    #[test]
    fn assignment_to_undeclared_is_rejected() {
        assert!(matches!(err("method M (n : Nat) do x := 1"), ParseError::Unresolved { .. }));
        assert!(matches!(
            err("method M (n : Nat) do n := 1"),
            ParseError::Invalid { .. }
        ));
    }

    #[test]
    fn literals_follow_context() {
        let p = parse("def f (x : Int) : Bool := x - 1 < 2 ∧ 0 ≤ x").unwrap();
        let printed = crate::syntax::print(&p);
        assert!(printed.contains("x - 1 < 2"), "{printed}");
        assert!(matches!(err("def f (x : Nat) : Bool := x < -1"), ParseError::Type { .. }));
        parse("def f (b : Bool) (x : Int) : Int := if b then (if b then 3 else 4) else -1").unwrap();
        parse("def f (b : Bool) (x : Int) : Bool := (if b then 1 else 2) < x").unwrap();
    }

    #[test]
    fn mixing_nat_and_int_needs_a_cast() {
        assert!(matches!(err("def f (x : Nat) (y : Int) : Int := x + y"), ParseError::Type { .. }));
        parse("def f (x : Nat) (y : Int) : Int := (x : Int) + y").unwrap();
    }

    #[test]
    fn recursion_must_decrease() {
        parse("def f (n : Nat) : Nat := if n = 0 then 0 else n + f(n - 1)").unwrap();
        assert!(matches!(err("def f (n : Nat) : Nat := f(n)"), ParseError::Invalid { .. }));
        // only earlier definitions are visible
        assert!(matches!(
            err("def f (n : Nat) : Nat := g(n)\ndef g (n : Nat) : Nat := n"),
            ParseError::Unresolved { .. }
        ));
    }

    #[test]
    fn requires_sees_only_params() {
        assert!(matches!(
            err("method M (n : Nat) return (r : Nat) require r = 0 do return n"),
            ParseError::Unresolved { .. }
        ));
    }

    #[test]
    fn missing_return_and_arity() {
        assert!(matches!(err("method M (n : Nat) return (r : Nat) do let x := n"), ParseError::Invalid { .. }));
        assert!(matches!(err("method M (n : Nat) return (r : Nat) do return n, n"), ParseError::Invalid { .. }));
    }

    #[test]
    fn duplicate_labels_are_syntax_errors() {
        let src = "method M (n : Nat) do let mut i := 0 while i < n invariant \"a\" i ≤ n invariant \"a\" true do i := i + 1 end end";
        assert!(matches!(err(src), ParseError::Syntax { .. }));
    }

    #[test]
    fn duplicate_top_level_names() {
        assert!(matches!(
            err("def f (n : Nat) : Nat := n\ndef f (n : Nat) : Nat := n"),
            ParseError::Invalid { .. }
        ));
    }

    #[test]
    fn zero_arity_defs_resolve_as_calls() {
        let p = parse("def xs : Array Int := #[1, 2, 3]\ndef ok : Prop := xs.size = 3").unwrap();
        assert!(crate::syntax::print(&p).contains("xs().size"));
    }
}
