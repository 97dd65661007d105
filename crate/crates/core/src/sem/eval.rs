use std::cmp::Ordering;

use super::bound::{candidates, Side};
use super::{Env, Value};
use crate::num::Integer;
use crate::syntax::*;

pub const DEFAULT_FUEL: u64 = 1_000_000;

/// Nested definition calls beyond this depth are reported as fuel exhaustion.
pub const MAX_CALL_DEPTH: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErrorKind {
    UnboundedQuantifier,
    FuelExhausted,
    /// Ill-typed input or unbound variable; cannot arise for checked programs
    /// evaluated in well-typed environments.
    Stuck,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{kind:?} at {span}: {detail}")]
pub struct EvalError {
    pub kind: ErrorKind,
    pub detail: String,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalOutcome {
    True,
    False,
    Error(ErrorKind, String),
}

impl EvalOutcome {
    pub fn is_true(&self) -> bool {
        *self == EvalOutcome::True
    }
}

impl From<Result<Value, EvalError>> for EvalOutcome {
    fn from(r: Result<Value, EvalError>) -> EvalOutcome {
        match r {
            Ok(Value::Bool(true)) => EvalOutcome::True,
            Ok(Value::Bool(false)) => EvalOutcome::False,
            Ok(v) => EvalOutcome::Error(ErrorKind::Stuck, format!("formula evaluated to {v}")),
            Err(e) => EvalOutcome::Error(e.kind, format!("{}: {}", e.span, e.detail)),
        }
    }
}

type EResult<T> = Result<T, EvalError>;

fn err<T>(kind: ErrorKind, span: Span, detail: impl Into<String>) -> EResult<T> {
    Err(EvalError { kind, detail: detail.into(), span })
}

fn stuck<T>(span: Span, detail: impl Into<String>) -> EResult<T> {
    err(ErrorKind::Stuck, span, detail)
}

/// One shared budget for loop iterations, calls and enumerated points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fuel {
    remaining: u64,
}

impl Fuel {
    pub fn new(n: u64) -> Fuel {
        Fuel { remaining: n }
    }

    pub fn remaining(&self) -> u64 {
        self.remaining
    }

    pub fn tick(&mut self, span: Span) -> EResult<()> {
        if self.remaining == 0 {
            return err(ErrorKind::FuelExhausted, span, "fuel exhausted");
        }
        self.remaining -= 1;
        Ok(())
    }
}

/// Equality that ignores the Nat/Int tag distinction.
pub fn values_equal(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Nat(x) | Value::Int(x), Value::Nat(y) | Value::Int(y)) => x == y,
        (Value::Pair(a1, a2), Value::Pair(b1, b2)) => values_equal(a1, b1) && values_equal(a2, b2),
        (Value::Array(xs), Value::Array(ys)) | (Value::List(xs), Value::List(ys)) => {
            xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| values_equal(x, y))
        }
        _ => a == b,
    }
}

fn compare(a: &Value, b: &Value) -> Option<Ordering> {
    match (a, b) {
        (Value::Nat(x) | Value::Int(x), Value::Nat(y) | Value::Int(y)) => Some(x.cmp(y)),
        (Value::Char(x), Value::Char(y)) => Some(x.cmp(y)),
        (Value::Text(x), Value::Text(y)) => Some(x.cmp(y)),
        (Value::Bool(x), Value::Bool(y)) => Some(x.cmp(y)),
        _ => None,
    }
}

/// Arithmetic on two numbers. Both Nat gives Nat semantics (truncating
/// subtraction); otherwise Int.
pub fn arith(op: BinOp, a: &Value, b: &Value) -> Option<Value> {
    let (Some(x), Some(y)) = (a.as_integer(), b.as_integer()) else {
        return None;
    };
    let nat = matches!((a, b), (Value::Nat(_), Value::Nat(_)));
    let r = match op {
        BinOp::Add => x.add(y),
        BinOp::Sub if nat => x.monus(y),
        BinOp::Sub => x.sub(y),
        BinOp::Mul => x.mul(y),
        BinOp::Div => x.div_euclid(y),
        BinOp::Mod => x.rem_euclid(y),
        _ => return None,
    };
    Some(if nat { Value::Nat(r) } else { Value::Int(r) })
}

/// How binder enumeration proceeds for one quantifier.
enum Domain {
    Bools,
    Range(Integer, Integer, bool),
}

pub struct Evaluator<'p> {
    prog: &'p Program,
    pub fuel: Fuel,
    /// Quantifier, `countRange` and parameter bindings.
    scope: Vec<(Ident, Value)>,
    /// Start of the innermost call frame in `scope`.
    frame: usize,
    /// Whether the caller's environment is visible (false inside definition bodies).
    env_visible: bool,
    depth: usize,
}

impl<'p> Evaluator<'p> {
    pub fn new(prog: &'p Program, fuel: u64) -> Evaluator<'p> {
        Evaluator { prog, fuel: Fuel::new(fuel), scope: Vec::new(), frame: 0, env_visible: true, depth: 0 }
    }

    pub fn program(&self) -> &'p Program {
        self.prog
    }

    fn lookup<'a>(&'a self, env: &'a Env, name: &str) -> Option<&'a Value> {
        if let Some((_, v)) = self.scope[self.frame..].iter().rev().find(|(n, _)| &**n == name) {
            return Some(v);
        }
        if self.env_visible {
            env.get(name)
        } else {
            None
        }
    }

    fn var<'a>(&'a self, env: &'a Env, name: &str, span: Span) -> EResult<&'a Value> {
        match self.lookup(env, name) {
            Some(v) => Ok(v),
            None => stuck(span, format!("unbound variable `{name}`")),
        }
    }

    fn bool_of(&mut self, env: &Env, e: &Expr) -> EResult<bool> {
        match self.eval(env, e)? {
            Value::Bool(b) => Ok(b),
            v => stuck(e.span, format!("expected a Bool, got {v}")),
        }
    }

    fn int_of(&mut self, env: &Env, e: &Expr) -> EResult<Integer> {
        match self.eval(env, e)? {
            Value::Nat(n) | Value::Int(n) => Ok(n),
            v => stuck(e.span, format!("expected a number, got {v}")),
        }
    }

    fn index(&mut self, env: &Env, base: &Expr, index: &Expr, elem: &SemType) -> EResult<Value> {
        let i = self.int_of(env, index)?;
        let pick = |v: &Value| -> EResult<Value> {
            let i = if i.is_negative() { None } else { i.to_usize() };
            let got = match v {
                Value::Array(xs) | Value::List(xs) => i.and_then(|i| xs.get(i).cloned()),
                Value::Text(s) => i.and_then(|i| s.chars().nth(i)).map(Value::Char),
                other => return stuck(base.span, format!("cannot index {other}")),
            };
            Ok(got.unwrap_or_else(|| Value::default_of(elem)))
        };
        if let ExprKind::Var(name) = &base.kind {
            return pick(self.var(env, name, base.span)?);
        }
        let v = self.eval(env, base)?;
        pick(&v)
    }

    fn size(&mut self, env: &Env, a: &Expr) -> EResult<Value> {
        let len = if let ExprKind::Var(name) = &a.kind {
            self.var(env, name, a.span)?.len()
        } else {
            self.eval(env, a)?.len()
        };
        match len {
            Some(n) => Ok(Value::Nat(n.into())),
            None => stuck(a.span, "size of a non-sequence"),
        }
    }

    /// Evaluates `e` with `env` supplying the free variables.
    pub fn eval(&mut self, env: &Env, e: &Expr) -> EResult<Value> {
        let span = e.span;
        match &e.kind {
            ExprKind::Bool(b) => Ok(Value::Bool(*b)),
            ExprKind::Num(n, NumKind::Nat) => Ok(Value::Nat(n.clone())),
            ExprKind::Num(n, NumKind::Int) => Ok(Value::Int(n.clone())),
            ExprKind::Char(c) => Ok(Value::Char(*c)),
            ExprKind::Str(s) => Ok(Value::Text(s.clone())),
            ExprKind::Var(name) => self.var(env, name, span).cloned(),
            ExprKind::Unary(UnOp::Not, a) => Ok(Value::Bool(!self.bool_of(env, a)?)),
            ExprKind::Unary(UnOp::Neg, a) => Ok(Value::Int(self.int_of(env, a)?.neg())),
            ExprKind::Binary(op, a, b) => self.binary(env, *op, a, b, span),
            ExprKind::Index { base, index, elem } => self.index(env, base, index, elem),
            ExprKind::Size(a) => self.size(env, a),
            ExprKind::Proj(a, p) => match self.eval(env, a)? {
                Value::Pair(x, y) => Ok(if *p == Proj::First { *x } else { *y }),
                v => stuck(span, format!("projection of {v}")),
            },
            ExprKind::ArrayLit(xs) => Ok(Value::Array(self.eval_all(env, xs)?)),
            ExprKind::ListLit(xs) => Ok(Value::List(self.eval_all(env, xs)?)),
            ExprKind::Pair(a, b) => Ok(Value::pair(self.eval(env, a)?, self.eval(env, b)?)),
            ExprKind::Call(f, args) => {
                let vals = self.eval_all(env, args)?;
                self.call(f, vals, span)
            }
            ExprKind::CountRange { var, lo, hi, body } => {
                let lo = self.int_of(env, lo)?;
                let hi = self.int_of(env, hi)?;
                let mut k = lo.max(Integer::ZERO);
                let mut count = 0u64;
                while k < hi {
                    self.fuel.tick(span)?;
                    self.scope.push((var.clone(), Value::Nat(k.clone())));
                    let r = self.bool_of(env, body);
                    self.scope.pop();
                    if r? {
                        count += 1;
                    }
                    k = k.add(&Integer::ONE);
                }
                Ok(Value::Nat(count.into()))
            }
            ExprKind::Quant(q, var, ty, body) => self.quantifier(env, *q, var, ty, body, span).map(Value::Bool),
            ExprKind::Ite(c, a, b) => {
                if self.bool_of(env, c)? {
                    self.eval(env, a)
                } else {
                    self.eval(env, b)
                }
            }
            ExprKind::Cast(a, ty) => Ok(self.eval(env, a)?.coerce(ty)),
        }
    }

    fn eval_all(&mut self, env: &Env, xs: &[Expr]) -> EResult<Vec<Value>> {
        xs.iter().map(|x| self.eval(env, x)).collect()
    }

    fn binary(&mut self, env: &Env, op: BinOp, a: &Expr, b: &Expr, span: Span) -> EResult<Value> {
        let r = match op {
            BinOp::And => self.bool_of(env, a)? && self.bool_of(env, b)?,
            BinOp::Or => self.bool_of(env, a)? || self.bool_of(env, b)?,
            BinOp::Implies => !self.bool_of(env, a)? || self.bool_of(env, b)?,
            BinOp::Iff => self.bool_of(env, a)? == self.bool_of(env, b)?,
            _ => {
                let x = self.eval(env, a)?;
                let y = self.eval(env, b)?;
                if op.is_arith() {
                    return match arith(op, &x, &y) {
                        Some(v) => Ok(v),
                        None => stuck(span, format!("`{}` applied to {x} and {y}", op.symbol())),
                    };
                }
                match op {
                    BinOp::Eq => values_equal(&x, &y),
                    BinOp::Ne => !values_equal(&x, &y),
                    _ => {
                        let Some(ord) = compare(&x, &y) else {
                            return stuck(span, format!("cannot compare {x} and {y}"));
                        };
                        match op {
                            BinOp::Lt => ord.is_lt(),
                            BinOp::Le => ord.is_le(),
                            BinOp::Gt => ord.is_gt(),
                            _ => ord.is_ge(),
                        }
                    }
                }
            }
        };
        Ok(Value::Bool(r))
    }

    /// Applies a definition or builtin to evaluated arguments.
    pub fn call(&mut self, f: &str, args: Vec<Value>, span: Span) -> EResult<Value> {
        self.fuel.tick(span)?;
        let arity = match f {
            "sum" => 1,
            "range" | "push" => 2,
            "set" => 3,
            _ => usize::MAX,
        };
        if arity != usize::MAX && args.len() != arity {
            return stuck(span, format!("`{f}` expects {arity} arguments"));
        }
        let seq = |v: &Value| v.elements().map_or_else(|| stuck(span, format!("`{f}` needs a sequence")), Ok);
        match f {
            "sum" => {
                let mut acc = Value::Nat(Integer::ZERO);
                for x in seq(&args[0])? {
                    acc = match arith(BinOp::Add, &acc, &x) {
                        Some(v) => v,
                        None => return stuck(span, "sum of non-numbers"),
                    };
                }
                return Ok(acc);
            }
            "range" => {
                let (Some(lo), Some(hi)) = (args[0].as_integer(), args[1].as_integer()) else {
                    return stuck(span, "range bounds must be numbers");
                };
                let mut out = Vec::new();
                let mut k = lo.clone();
                while &k < hi {
                    self.fuel.tick(span)?;
                    out.push(Value::Nat(k.clone()));
                    k = k.add(&Integer::ONE);
                }
                return Ok(Value::Array(out));
            }
            "push" => {
                let mut xs = seq(&args[0])?;
                xs.push(args[1].clone());
                return Ok(args[0].with_elements(xs));
            }
            "set" => {
                let mut xs = seq(&args[0])?;
                if let Some(slot) = args[1].as_integer().and_then(Integer::to_usize).and_then(|i| xs.get_mut(i)) {
                    *slot = args[2].clone();
                }
                return Ok(args[0].with_elements(xs));
            }
            _ => {}
        }
        let prog = self.prog;
        let Some(def) = prog.def(f) else {
            return stuck(span, format!("unknown function `{f}`"));
        };
        if args.len() != def.params.len() {
            return stuck(span, format!("`{f}` expects {} arguments", def.params.len()));
        }
        if self.depth >= MAX_CALL_DEPTH {
            return err(ErrorKind::FuelExhausted, span, "call depth limit reached");
        }
        let saved = (self.frame, self.env_visible, self.scope.len());
        self.frame = self.scope.len();
        self.env_visible = false;
        self.depth += 1;
        for (p, v) in def.params.iter().zip(args) {
            self.scope.push((p.name.clone(), v.coerce(&p.ty)));
        }
        let r = self.eval(&Env::new(), &def.body);
        self.depth -= 1;
        self.scope.truncate(saved.2);
        self.frame = saved.0;
        self.env_visible = saved.1;
        Ok(r?.coerce(&def.result.sem_type()))
    }

    /// The finite domain for a quantified variable, if one can be inferred.
    fn domain(&mut self, env: &Env, q: Quantifier, var: &Ident, ty: &SemType, body: &Expr) -> Option<Domain> {
        if *ty == SemType::Bool {
            return Some(Domain::Bools);
        }
        if !ty.is_numeric() {
            return None;
        }
        let mut upper: Option<Integer> = None;
        let mut lower: Option<Integer> = None;
        for c in candidates(self.prog, q, var, body) {
            // A candidate whose expression fails to evaluate is simply not used.
            let Ok(v) = self.int_of(env, &c.expr) else { continue };
            let v = v.add(&c.shift);
            match c.side {
                Side::Upper => upper = Some(upper.map_or(v.clone(), |u| u.min(v))),
                Side::Lower => lower = Some(lower.map_or(v.clone(), |l| l.max(v))),
            }
        }
        let nat = *ty == SemType::Nat;
        if nat {
            lower = Some(lower.unwrap_or(Integer::ZERO).max(Integer::ZERO));
        }
        Some(Domain::Range(lower?, upper?, nat))
    }

    fn quantifier(&mut self, env: &Env, q: Quantifier, var: &Ident, ty: &SemType, body: &Expr, span: Span) -> EResult<bool> {
        let Some(domain) = self.domain(env, q, var, ty, body) else {
            let sym = if q == Quantifier::Forall { '∀' } else { '∃' };
            return err(ErrorKind::UnboundedQuantifier, span, format!("no finite bound for `{sym} {var} : {ty}`"));
        };
        let want = q == Quantifier::Exists;
        let test = |ev: &mut Self, v: Value| -> EResult<bool> {
            ev.fuel.tick(span)?;
            ev.scope.push((var.clone(), v));
            let r = ev.bool_of(env, body);
            ev.scope.pop();
            r
        };
        match domain {
            Domain::Bools => {
                for b in [false, true] {
                    if test(self, Value::Bool(b))? == want {
                        return Ok(want);
                    }
                }
            }
            Domain::Range(lo, hi, nat) => {
                let mut k = lo;
                while k < hi {
                    let v = if nat { Value::Nat(k.clone()) } else { Value::Int(k.clone()) };
                    if test(self, v)? == want {
                        return Ok(want);
                    }
                    k = k.add(&Integer::ONE);
                }
            }
        }
        Ok(!want)
    }
}

/// Evaluates a formula to a three-valued outcome.
///
/// ```
/// use vtkit::sem::{eval_formula, Env, EvalOutcome, Value, DEFAULT_FUEL};
/// use vtkit::syntax::{parse, parse_expr_in, SemType};
///
/// let prog = parse("").unwrap();
/// let arr = vec![("arr".into(), SemType::array(SemType::Int))];
/// let (f, _) = parse_expr_in(&prog, &arr, "∃ i : Nat, i < arr.size ∧ arr[i]! < 0").unwrap();
/// let env = Env::from_pairs([("arr", Value::Array(vec![Value::int(1), Value::int(-2)]))]);
/// assert_eq!(eval_formula(&prog, &env, &f, DEFAULT_FUEL), EvalOutcome::True);
/// ```
pub fn eval_formula(prog: &Program, env: &Env, f: &Expr, fuel: u64) -> EvalOutcome {
    Evaluator::new(prog, fuel).eval(env, f).into()
}

pub fn eval_expr(prog: &Program, env: &Env, e: &Expr, fuel: u64) -> Result<Value, EvalError> {
    Evaluator::new(prog, fuel).eval(env, e)
}

/// Applies a pure definition to arguments.
pub fn eval_pure(prog: &Program, name: &str, args: Vec<Value>, fuel: u64) -> Result<Value, EvalError> {
    Evaluator::new(prog, fuel).call(name, args, Span::default())
}

/// Smallest exclusive upper bound inferred for the quantifier `f`, evaluated in `env`.
pub fn infer_bound(prog: &Program, f: &Expr, env: &Env) -> Option<Integer> {
    let ExprKind::Quant(q, var, _, body) = &f.kind else {
        return None;
    };
    let mut ev = Evaluator::new(prog, DEFAULT_FUEL);
    candidates(prog, *q, var, body)
        .into_iter()
        .filter(|c| c.side == Side::Upper)
        .filter_map(|c| ev.int_of(env, &c.expr).ok().map(|v| v.add(&c.shift)))
        .min()
}
