use super::eval::{EvalError, Evaluator};
use super::{Env, Value};
use crate::syntax::*;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RuntimeError {
    #[error("no method named `{0}`")]
    UnknownMethod(String),
    #[error("`{method}` expects {expected} argument(s), got {found}")]
    Arity { method: String, expected: usize, found: usize },
    #[error("argument `{param}` must be a {expected}, got {found}")]
    ArgType { param: String, expected: String, found: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("method finished without returning")]
    NoReturn,
    /// A monitor stopped the run.
    #[error("stopped by monitor")]
    Halted,
}

impl RuntimeError {
    pub fn is_fuel(&self) -> bool {
        matches!(self, RuntimeError::Eval(e) if e.kind == super::ErrorKind::FuelExhausted)
    }
}

/// Returned by a monitor hook to abort execution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Halt;

/// Position of a loop event.
#[derive(Clone, Copy, Debug)]
pub struct LoopSite<'a> {
    /// Pre-order index of the loop within the method.
    pub index: usize,
    pub lp: &'a Loop,
    /// Completed iterations so far.
    pub iteration: u64,
}

/// Observation hooks called by the interpreter around loops.
pub trait Monitor {
    /// Before the guard is evaluated for the first time.
    fn loop_entry(&mut self, _env: &Env, _site: &LoopSite<'_>) -> Result<(), Halt> {
        Ok(())
    }
    /// After the guard held, before the body runs.
    fn iteration_start(&mut self, _env: &Env, _site: &LoopSite<'_>) -> Result<(), Halt> {
        Ok(())
    }
    /// After the body completed without returning.
    fn iteration_end(&mut self, _env: &Env, _site: &LoopSite<'_>) -> Result<(), Halt> {
        Ok(())
    }
}

pub struct NoMonitor;

impl Monitor for NoMonitor {}

enum Flow {
    Normal,
    Return(Vec<Value>),
}

struct Interp<'p, 'm> {
    ev: Evaluator<'p>,
    loops: Vec<&'p Loop>,
    monitor: &'m mut dyn Monitor,
}

/// Keeps a variable's Int tag when a Nat-tagged number is stored into it.
fn retag(old: Option<&Value>, v: Value) -> Value {
    match (old, v) {
        (Some(Value::Int(_)), Value::Nat(n)) => Value::Int(n),
        (_, v) => v,
    }
}

impl<'p> Interp<'p, '_> {
    fn loop_index(&self, lp: &Loop) -> usize {
        self.loops.iter().position(|l| std::ptr::eq(*l, lp)).unwrap_or(usize::MAX)
    }

    fn halt<T>(r: Result<T, Halt>) -> Result<T, RuntimeError> {
        r.map_err(|_| RuntimeError::Halted)
    }

    fn block(&mut self, block: &'p [Stmt], env: &mut Env) -> Result<Flow, RuntimeError> {
        let depth = env.depth();
        for s in block {
            if let Flow::Return(v) = self.stmt(s, env)? {
                env.truncate(depth);
                return Ok(Flow::Return(v));
            }
        }
        env.truncate(depth);
        Ok(Flow::Normal)
    }

    fn stmt(&mut self, s: &'p Stmt, env: &mut Env) -> Result<Flow, RuntimeError> {
        match &s.kind {
            StmtKind::Let { name, mutable, ty, value } => {
                let mut v = self.ev.eval(env, value)?;
                if let Some(t) = ty {
                    v = v.coerce(t);
                }
                env.bind(name.clone(), v, *mutable);
            }
            StmtKind::Assign { name, value } => {
                let v = retag(env.get(name), self.ev.eval(env, value)?);
                if env.assign(name, v).is_err() {
                    return Err(RuntimeError::Eval(EvalError {
                        kind: super::ErrorKind::Stuck,
                        detail: format!("cannot assign `{name}`"),
                        span: s.span,
                    }));
                }
            }
            StmtKind::If { cond, then_block, else_block } => {
                let c = self.ev.eval(env, cond)?;
                let branch = if c == Value::Bool(true) { then_block } else { else_block };
                return self.block(branch, env);
            }
            StmtKind::While(lp) => {
                let mut site = LoopSite { index: self.loop_index(lp), lp, iteration: 0 };
                Self::halt(self.monitor.loop_entry(env, &site))?;
                loop {
                    if self.ev.eval(env, &lp.guard)? != Value::Bool(true) {
                        break;
                    }
                    self.ev.fuel.tick(lp.span)?;
                    Self::halt(self.monitor.iteration_start(env, &site))?;
                    if let Flow::Return(v) = self.block(&lp.body, env)? {
                        return Ok(Flow::Return(v));
                    }
                    site.iteration += 1;
                    Self::halt(self.monitor.iteration_end(env, &site))?;
                }
            }
            StmtKind::Return(values) => {
                let vals = values.iter().map(|e| self.ev.eval(env, e)).collect::<Result<Vec<_>, _>>()?;
                return Ok(Flow::Return(vals));
            }
        }
        Ok(Flow::Normal)
    }
}

/// Binds checked arguments as the immutable parameters of `m`.
pub fn bind_params(m: &Method, args: Vec<Value>) -> Result<Env, RuntimeError> {
    if args.len() != m.params.len() {
        return Err(RuntimeError::Arity { method: m.name.to_string(), expected: m.params.len(), found: args.len() });
    }
    let mut env = Env::new();
    for (p, v) in m.params.iter().zip(args) {
        let v = v.coerce(&p.ty);
        if !v.has_type(&p.ty) {
            return Err(RuntimeError::ArgType { param: p.name.to_string(), expected: p.ty.to_string(), found: v.to_string() });
        }
        env.bind(p.name.clone(), v, false);
    }
    Ok(env)
}

/// Runs a method under a monitor. Returns the values of the `return` clause.
pub fn run_method_with(
    prog: &Program,
    name: &str,
    args: Vec<Value>,
    fuel: u64,
    monitor: &mut dyn Monitor,
) -> Result<Vec<Value>, RuntimeError> {
    let m = prog.method(name).ok_or_else(|| RuntimeError::UnknownMethod(name.to_string()))?;
    let mut env = bind_params(m, args)?;
    let mut it = Interp { ev: Evaluator::new(prog, fuel), loops: m.loops(), monitor };
    match it.block(&m.body, &mut env)? {
        Flow::Return(vals) => Ok(vals.into_iter().zip(&m.returns).map(|(v, p)| v.coerce(&p.ty)).collect()),
        Flow::Normal if m.returns.is_empty() => Ok(Vec::new()),
        Flow::Normal => Err(RuntimeError::NoReturn),
    }
}

/// Runs a method to completion.
///
/// ```
/// use vtkit::sem::{run_method, Value, DEFAULT_FUEL};
///
/// let prog = vtkit::syntax::parse("method Id (n : Nat) return (r : Nat) ensures r = n do return n").unwrap();
/// assert_eq!(run_method(&prog, "Id", vec![Value::nat(5)], DEFAULT_FUEL), Ok(vec![Value::nat(5)]));
/// ```
pub fn run_method(prog: &Program, name: &str, args: Vec<Value>, fuel: u64) -> Result<Vec<Value>, RuntimeError> {
    run_method_with(prog, name, args, fuel, &mut NoMonitor)
}
