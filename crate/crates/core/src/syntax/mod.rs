//! Surface language: tokens, AST, parser, type checker and printer.

pub mod ast;
mod check;
mod lexer;
mod parser;
mod print;
pub mod visit;

pub use ast::*;
pub use check::{always_returns, BUILTINS};
pub use print::{def_to_string, expr_to_string, method_to_string, print};

use parser::Parser;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("{line}:{col}: type error: expected {expected}, found {found}")]
    Type { line: u32, col: u32, expected: String, found: String },
    #[error("{line}:{col}: unresolved name `{name}`")]
    Unresolved { line: u32, col: u32, name: String },
    #[error("{line}:{col}: {msg}")]
    Invalid { line: u32, col: u32, msg: String },
}

impl ParseError {
    pub fn position(&self) -> (u32, u32) {
        match self {
            ParseError::Syntax { line, col, .. }
            | ParseError::Type { line, col, .. }
            | ParseError::Unresolved { line, col, .. }
            | ParseError::Invalid { line, col, .. } => (*line, *col),
        }
    }
}

/// Parses and type-checks a program.
///
/// ```
/// let prog = vtkit::syntax::parse("def double (n : Nat) : Nat := 2 * n").unwrap();
/// assert_eq!(prog.defs[0].name.as_ref(), "double");
/// ```
pub fn parse(source: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(source)?;
    let prog = p.program()?;
    p.finish()?;
    check::check(prog)
}

/// Parses an expression without type checking. Literal and index types keep
/// their defaults (`Nat`).
pub fn parse_expr(source: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(source)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

/// Parses and types an expression against the definitions of `prog` with the
/// given variables in scope.
pub fn parse_expr_in(
    prog: &Program,
    vars: &[(Ident, SemType)],
    source: &str,
) -> Result<(Expr, SemType), ParseError> {
    check::check_expr(prog, vars, parse_expr(source)?, None)
}

/// Types an already-built expression, as [`parse_expr_in`] does.
pub fn check_expr(
    prog: &Program,
    vars: &[(Ident, SemType)],
    e: Expr,
    expected: Option<&SemType>,
) -> Result<(Expr, SemType), ParseError> {
    check::check_expr(prog, vars, e, expected)
}

pub fn parse_type(source: &str) -> Result<SemType, ParseError> {
    let mut p = Parser::new(source)?;
    let t = p.ty()?;
    p.finish()?;
    Ok(t)
}

pub fn print_expr(e: &Expr) -> String {
    expr_to_string(e)
}
