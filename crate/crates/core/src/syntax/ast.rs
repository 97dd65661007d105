//! Abstract syntax of annotated programs.
//!
//! One expression type serves both executable code and specifications:
//! propositions are boolean-valued expressions. A handful of nodes carry
//! annotations that the checker fills in (numeric literal kinds, index
//! element types, `let` types); the parser leaves placeholders there.
//!
//! Equality on AST nodes ignores source positions, so a program and its
//! reparsed pretty-printing compare equal.

use std::fmt;
use std::sync::Arc;

use crate::num::Integer;

/// Identifiers are shared, immutable strings.
pub type Ident = Arc<str>;

/// A 1-based source position.
#[derive(Clone, Copy, Debug, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Span {
        Span { line, col }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Eq for Span {}

/// Types of runtime values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SemType {
    Bool,
    Nat,
    Int,
    Char,
    Text,
    Pair(Box<SemType>, Box<SemType>),
    Array(Box<SemType>),
    List(Box<SemType>),
}

impl SemType {
    pub fn pair(a: SemType, b: SemType) -> SemType {
        SemType::Pair(Box::new(a), Box::new(b))
    }

    pub fn array(elem: SemType) -> SemType {
        SemType::Array(Box::new(elem))
    }

    pub fn list(elem: SemType) -> SemType {
        SemType::List(Box::new(elem))
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, SemType::Nat | SemType::Int)
    }

    /// Element type of a sequence type; `Text` is a sequence of `Char`.
    pub fn element(&self) -> Option<SemType> {
        match self {
            SemType::Array(e) | SemType::List(e) => Some((**e).clone()),
            SemType::Text => Some(SemType::Char),
            _ => None,
        }
    }

    fn is_atomic(&self) -> bool {
        !matches!(self, SemType::Array(_) | SemType::List(_))
    }
}

impl fmt::Display for SemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemType::Bool => f.write_str("Bool"),
            SemType::Nat => f.write_str("Nat"),
            SemType::Int => f.write_str("Int"),
            SemType::Char => f.write_str("Char"),
            SemType::Text => f.write_str("String"),
            SemType::Pair(a, b) => write!(f, "({a} × {b})"),
            SemType::Array(e) | SemType::List(e) => {
                let head = if matches!(self, SemType::Array(_)) { "Array" } else { "List" };
                if e.is_atomic() {
                    write!(f, "{head} {e}")
                } else {
                    write!(f, "{head} ({e})")
                }
            }
        }
    }
}

/// The numeric domain of an integer literal, resolved by the checker.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NumKind {
    Nat,
    Int,
}

impl NumKind {
    pub fn sem_type(self) -> SemType {
        match self {
            NumKind::Nat => SemType::Nat,
            NumKind::Int => SemType::Int,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Implies,
    Iff,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Eq => "=",
            BinOp::Ne => "≠",
            BinOp::Lt => "<",
            BinOp::Le => "≤",
            BinOp::Gt => ">",
            BinOp::Ge => "≥",
            BinOp::And => "∧",
            BinOp::Or => "∨",
            BinOp::Implies => "→",
            BinOp::Iff => "↔",
        }
    }

    pub fn is_arith(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod)
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge
        )
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or | BinOp::Implies | BinOp::Iff)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Forall,
    Exists,
}

/// Pair projections `.1` and `.2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Proj {
    First,
    Second,
}

#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Expr) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Expr {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Bool(bool),
    Num(Integer, NumKind),
    Char(char),
    Str(String),
    Var(Ident),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// `base[index]!`, returning the element default when out of range.
    Index {
        base: Box<Expr>,
        index: Box<Expr>,
        elem: SemType,
    },
    Size(Box<Expr>),
    Proj(Box<Expr>, Proj),
    ArrayLit(Vec<Expr>),
    ListLit(Vec<Expr>),
    Pair(Box<Expr>, Box<Expr>),
    /// Application of a pure definition or builtin function.
    Call(Ident, Vec<Expr>),
    /// `countRange(lo, hi, fun var => body)`: how many `var ∈ [lo, hi)` satisfy `body`.
    CountRange {
        var: Ident,
        lo: Box<Expr>,
        hi: Box<Expr>,
        body: Box<Expr>,
    },
    Quant(Quantifier, Ident, SemType, Box<Expr>),
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
    /// Type ascription `(e : T)`, which also coerces `Nat` into `Int`.
    Cast(Box<Expr>, SemType),
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Expr {
        Expr { kind, span }
    }

    /// Builds a node without a meaningful source position.
    pub fn synth(kind: ExprKind) -> Expr {
        Expr { kind, span: Span::default() }
    }

    pub fn bool(b: bool) -> Expr {
        Expr::synth(ExprKind::Bool(b))
    }

    pub fn var(name: &Ident) -> Expr {
        Expr::synth(ExprKind::Var(name.clone()))
    }

    pub fn num(value: impl Into<Integer>, kind: NumKind) -> Expr {
        Expr::synth(ExprKind::Num(value.into(), kind))
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        let span = lhs.span;
        Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Expr {
        let span = e.span;
        Expr::new(ExprKind::Unary(UnOp::Not, Box::new(e)), span)
    }

    /// Conjunction of a list, `true` when empty.
    pub fn conj(parts: impl IntoIterator<Item = Expr>) -> Expr {
        let mut it = parts.into_iter();
        match it.next() {
            None => Expr::bool(true),
            Some(first) => it.fold(first, |acc, e| Expr::binary(BinOp::And, acc, e)),
        }
    }

    pub fn is_true_lit(&self) -> bool {
        matches!(self.kind, ExprKind::Bool(true))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: Ident,
    pub ty: SemType,
}

impl Param {
    pub fn new(name: &str, ty: SemType) -> Param {
        Param { name: name.into(), ty }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DefResult {
    Prop,
    Value(SemType),
}

impl DefResult {
    /// Propositions evaluate to booleans.
    pub fn sem_type(&self) -> SemType {
        match self {
            DefResult::Prop => SemType::Bool,
            DefResult::Value(t) => t.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PureDef {
    pub name: Ident,
    pub params: Vec<Param>,
    pub result: DefResult,
    pub body: Expr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Invariant {
    pub label: Option<String>,
    pub formula: Expr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Loop {
    pub guard: Expr,
    pub invariants: Vec<Invariant>,
    pub decreasing: Option<Expr>,
    pub body: Vec<Stmt>,
    pub span: Span,
}

impl Loop {
    /// Label of the `index`-th invariant; unlabeled invariants are named by position.
    pub fn invariant_label(&self, index: usize) -> String {
        match &self.invariants[index].label {
            Some(l) => l.clone(),
            None => format!("inv{}", index + 1),
        }
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.invariants.len()).map(|i| self.invariant_label(i)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    Let {
        name: Ident,
        mutable: bool,
        ty: Option<SemType>,
        value: Expr,
    },
    Assign {
        name: Ident,
        value: Expr,
    },
    If {
        cond: Expr,
        then_block: Vec<Stmt>,
        else_block: Vec<Stmt>,
    },
    While(Box<Loop>),
    Return(Vec<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Method {
    pub name: Ident,
    pub params: Vec<Param>,
    pub returns: Vec<Param>,
    pub requires: Vec<Expr>,
    pub ensures: Vec<Expr>,
    pub body: Vec<Stmt>,
    pub span: Span,
}

impl Method {
    pub fn requires_formula(&self) -> Expr {
        Expr::conj(self.requires.iter().cloned())
    }

    pub fn ensures_formula(&self) -> Expr {
        Expr::conj(self.ensures.iter().cloned())
    }

    /// Every loop in the body, in source (pre-)order.
    pub fn loops(&self) -> Vec<&Loop> {
        fn walk<'a>(block: &'a [Stmt], out: &mut Vec<&'a Loop>) {
            for s in block {
                match &s.kind {
                    StmtKind::If { then_block, else_block, .. } => {
                        walk(then_block, out);
                        walk(else_block, out);
                    }
                    StmtKind::While(lp) => {
                        out.push(lp);
                        walk(&lp.body, out);
                    }
                    _ => {}
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.body, &mut out);
        out
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub defs: Vec<PureDef>,
    pub methods: Vec<Method>,
}

impl Program {
    pub fn def(&self, name: &str) -> Option<&PureDef> {
        self.defs.iter().find(|d| &*d.name == name)
    }

    pub fn method(&self, name: &str) -> Option<&Method> {
        self.methods.iter().find(|m| &*m.name == name)
    }

    pub fn invariant_count(&self) -> usize {
        self.methods
            .iter()
            .flat_map(|m| m.loops())
            .map(|l| l.invariants.len())
            .sum()
    }
}
