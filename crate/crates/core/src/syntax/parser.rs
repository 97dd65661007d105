//! Recursive-descent parser producing an unchecked [`Program`].
//!
//! Blocks are keyword-delimited: `if c then ... [else ...] end`,
//! `while c ... do ... end`, and a method body runs from `do` to an
//! optional `end` (or the next top-level item). Statements need no
//! separators; `;` is accepted between them.

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;
use crate::num::Integer;

type PResult<T> = Result<T, ParseError>;

pub struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub fn new(source: &str) -> PResult<Parser> {
        Ok(Parser { tokens: tokenize(source)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn at(&self, t: &Tok) -> bool {
        self.peek() == t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.at(t) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let s = self.span();
        Err(ParseError::Syntax { line: s.line, col: s.col, msg: msg.into() })
    }

    fn expect(&mut self, t: Tok) -> PResult<Token> {
        if self.at(&t) {
            Ok(self.bump())
        } else {
            let found = self.peek().describe();
            self.error(format!("expected {}, found {found}", t.describe()))
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s.as_str().into())
            }
            other => self.error(format!("expected identifier, found {}", other.describe())),
        }
    }

    pub fn program(&mut self) -> PResult<Program> {
        let mut prog = Program::default();
        loop {
            match self.peek() {
                Tok::Def => prog.defs.push(self.def()?),
                Tok::Method => prog.methods.push(self.method()?),
                Tok::Semi => {
                    self.bump();
                }
                Tok::Eof => return Ok(prog),
                other => {
                    let d = other.describe();
                    return self.error(format!("expected `def` or `method`, found {d}"));
                }
            }
        }
    }

    fn binder_groups(&mut self) -> PResult<Vec<Param>> {
        let mut out = Vec::new();
        while self.at(&Tok::LParen) {
            self.bump();
            let mut names = vec![self.ident()?];
            while let Tok::Ident(_) = self.peek() {
                names.push(self.ident()?);
            }
            self.expect(Tok::Colon)?;
            let ty = self.ty()?;
            self.expect(Tok::RParen)?;
            out.extend(names.into_iter().map(|name| Param { name, ty: ty.clone() }));
        }
        Ok(out)
    }

    fn def(&mut self) -> PResult<PureDef> {
        let span = self.expect(Tok::Def)?.span;
        let name = self.ident()?;
        let params = self.binder_groups()?;
        self.expect(Tok::Colon)?;
        let result = if self.eat(&Tok::Prop) {
            DefResult::Prop
        } else {
            DefResult::Value(self.ty()?)
        };
        self.expect(Tok::Walrus)?;
        let body = self.expr()?;
        Ok(PureDef { name, params, result, body, span })
    }

    fn method(&mut self) -> PResult<Method> {
        let span = self.expect(Tok::Method)?.span;
        let name = self.ident()?;
        let params = self.binder_groups()?;
        let returns = if self.eat(&Tok::Return) { self.binder_groups()? } else { Vec::new() };
        let mut requires = Vec::new();
        let mut ensures = Vec::new();
        loop {
            if self.eat(&Tok::Require) {
                requires.push(self.expr()?);
            } else if self.eat(&Tok::Ensures) {
                ensures.push(self.expr()?);
            } else {
                break;
            }
        }
        self.expect(Tok::Do)?;
        let body = self.block()?;
        self.eat(&Tok::End);
        Ok(Method { name, params, returns, requires, ensures, body, span })
    }

    fn block_ends(&self) -> bool {
        matches!(self.peek(), Tok::End | Tok::Else | Tok::Eof | Tok::Def | Tok::Method)
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        let mut out = Vec::new();
        loop {
            while self.eat(&Tok::Semi) {}
            if self.block_ends() {
                return Ok(out);
            }
            out.push(self.stmt()?);
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let span = self.span();
        let kind = match self.peek().clone() {
            Tok::Let => {
                self.bump();
                let mutable = self.eat(&Tok::Mut);
                let name = self.ident()?;
                let ty = if self.eat(&Tok::Colon) { Some(self.ty()?) } else { None };
                self.expect(Tok::Walrus)?;
                let value = self.expr()?;
                StmtKind::Let { name, mutable, ty, value }
            }
            Tok::If => {
                self.bump();
                let cond = self.expr()?;
                self.expect(Tok::Then)?;
                let then_block = self.block()?;
                let else_block = if self.eat(&Tok::Else) { self.block()? } else { Vec::new() };
                self.expect(Tok::End)?;
                StmtKind::If { cond, then_block, else_block }
            }
            Tok::While => {
                self.bump();
                let guard = self.expr()?;
                let mut invariants = Vec::new();
                let mut decreasing = None;
                loop {
                    let ispan = self.span();
                    if self.eat(&Tok::Invariant) {
                        let label = match self.peek().clone() {
                            Tok::Str(s) => {
                                self.bump();
                                Some(s)
                            }
                            _ => None,
                        };
                        let formula = self.expr()?;
                        invariants.push(Invariant { label, formula, span: ispan });
                    } else if self.at(&Tok::Decreasing) {
                        if decreasing.is_some() {
                            return self.error("a loop takes at most one `decreasing` clause");
                        }
                        self.bump();
                        decreasing = Some(self.expr()?);
                    } else {
                        break;
                    }
                }
                self.expect(Tok::Do)?;
                let body = self.block()?;
                self.expect(Tok::End)?;
                StmtKind::While(Box::new(Loop { guard, invariants, decreasing, body, span }))
            }
            Tok::Return => {
                self.bump();
                let mut values = Vec::new();
                if !(self.block_ends() || self.at(&Tok::Semi)) {
                    values.push(self.expr()?);
                    while self.eat(&Tok::Comma) {
                        values.push(self.expr()?);
                    }
                }
                StmtKind::Return(values)
            }
            Tok::Ident(_) if self.peek_at(1) == &Tok::Walrus => {
                let name = self.ident()?;
                self.bump();
                let value = self.expr()?;
                StmtKind::Assign { name, value }
            }
            other => return self.error(format!("expected statement, found {}", other.describe())),
        };
        Ok(Stmt { kind, span })
    }

    pub fn ty(&mut self) -> PResult<SemType> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "Array" || s == "List" => {
                self.bump();
                let elem = self.atomic_ty()?;
                Ok(if s == "Array" { SemType::array(elem) } else { SemType::list(elem) })
            }
            _ => self.atomic_ty(),
        }
    }

    fn atomic_ty(&mut self) -> PResult<SemType> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let t = match s.as_str() {
                    "Bool" => SemType::Bool,
                    "Nat" | "ℕ" => SemType::Nat,
                    "Int" | "ℤ" => SemType::Int,
                    "Char" => SemType::Char,
                    "String" => SemType::Text,
                    _ => return self.error(format!("unknown type `{s}`")),
                };
                self.bump();
                Ok(t)
            }
            Tok::LParen => {
                self.bump();
                let a = self.ty()?;
                if self.eat(&Tok::Times) || self.eat(&Tok::Star) {
                    let b = self.ty()?;
                    self.expect(Tok::RParen)?;
                    Ok(SemType::pair(a, b))
                } else {
                    self.expect(Tok::RParen)?;
                    Ok(a)
                }
            }
            other => self.error(format!("expected type, found {}", other.describe())),
        }
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        self.iff()
    }

    fn iff(&mut self) -> PResult<Expr> {
        let lhs = self.implies()?;
        if self.eat(&Tok::Iff) {
            let rhs = self.iff()?;
            return Ok(Expr::binary(BinOp::Iff, lhs, rhs));
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> PResult<Expr> {
        let lhs = self.or()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.implies()?;
            return Ok(Expr::binary(BinOp::Implies, lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> PResult<Expr> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Or) {
            let rhs = self.and()?;
            lhs = Expr::binary(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> PResult<Expr> {
        let mut lhs = self.not()?;
        while self.eat(&Tok::And) {
            let rhs = self.not()?;
            lhs = Expr::binary(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn not(&mut self) -> PResult<Expr> {
        let span = self.span();
        if self.eat(&Tok::Not) {
            let e = self.not()?;
            return Ok(Expr::new(ExprKind::Unary(UnOp::Not, Box::new(e)), span));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let lhs = self.additive()?;
        let op = match self.peek() {
            Tok::Eq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.additive()?;
        if matches!(self.peek(), Tok::Eq | Tok::Ne | Tok::Lt | Tok::Le | Tok::Gt | Tok::Ge) {
            return self.error("comparisons do not chain; add parentheses");
        }
        Ok(Expr::binary(op, lhs, rhs))
    }

    fn additive(&mut self) -> PResult<Expr> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.multiplicative()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn multiplicative(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                Tok::Percent => BinOp::Mod,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        let span = self.span();
        if self.eat(&Tok::Minus) {
            let e = self.unary()?;
            return Ok(Expr::new(ExprKind::Unary(UnOp::Neg, Box::new(e)), span));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            let span = e.span;
            if self.at(&Tok::LBracket) {
                self.bump();
                let index = self.expr()?;
                self.expect(Tok::RBracket)?;
                self.expect(Tok::Bang)?;
                e = Expr::new(
                    ExprKind::Index { base: Box::new(e), index: Box::new(index), elem: SemType::Nat },
                    span,
                );
            } else if self.at(&Tok::Dot) {
                self.bump();
                match self.peek().clone() {
                    Tok::Ident(s) if s == "size" || s == "length" => {
                        self.bump();
                        e = Expr::new(ExprKind::Size(Box::new(e)), span);
                    }
                    Tok::Ident(s) if s == "fst" => {
                        self.bump();
                        e = Expr::new(ExprKind::Proj(Box::new(e), Proj::First), span);
                    }
                    Tok::Ident(s) if s == "snd" => {
                        self.bump();
                        e = Expr::new(ExprKind::Proj(Box::new(e), Proj::Second), span);
                    }
                    Tok::Num(n) if n == Integer::from(1) || n == Integer::from(2) => {
                        self.bump();
                        let p = if n == Integer::ONE { Proj::First } else { Proj::Second };
                        e = Expr::new(ExprKind::Proj(Box::new(e), p), span);
                    }
                    other => {
                        return self.error(format!(
                            "expected `size`, `1` or `2` after `.`, found {}",
                            other.describe()
                        ))
                    }
                }
            } else {
                return Ok(e);
            }
        }
    }

    fn args(&mut self, close: Tok) -> PResult<Vec<Expr>> {
        let mut out = Vec::new();
        if self.eat(&close) {
            return Ok(out);
        }
        loop {
            out.push(self.expr()?);
            if self.eat(&Tok::Comma) {
                continue;
            }
            self.expect(close)?;
            return Ok(out);
        }
    }

    fn quantifier(&mut self, q: Quantifier, span: Span) -> PResult<Expr> {
        let mut binders: Vec<(Ident, SemType)> = Vec::new();
        if self.at(&Tok::LParen) {
            for p in self.binder_groups()? {
                binders.push((p.name, p.ty));
            }
        } else {
            let mut names = vec![self.ident()?];
            while let Tok::Ident(_) = self.peek() {
                names.push(self.ident()?);
            }
            self.expect(Tok::Colon)?;
            let ty = self.ty()?;
            binders.extend(names.into_iter().map(|n| (n, ty.clone())));
        }
        self.expect(Tok::Comma)?;
        let mut body = self.expr()?;
        for (name, ty) in binders.into_iter().rev() {
            body = Expr::new(ExprKind::Quant(q, name, ty, Box::new(body)), span);
        }
        Ok(body)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let span = self.span();
        let kind = match self.peek().clone() {
            Tok::True => {
                self.bump();
                ExprKind::Bool(true)
            }
            Tok::False => {
                self.bump();
                ExprKind::Bool(false)
            }
            Tok::Num(n) => {
                self.bump();
                ExprKind::Num(n, NumKind::Nat)
            }
            Tok::Str(s) => {
                self.bump();
                ExprKind::Str(s)
            }
            Tok::Char(c) => {
                self.bump();
                ExprKind::Char(c)
            }
            Tok::Forall => {
                self.bump();
                return self.quantifier(Quantifier::Forall, span);
            }
            Tok::Exists => {
                self.bump();
                return self.quantifier(Quantifier::Exists, span);
            }
            Tok::If => {
                self.bump();
                let c = self.expr()?;
                self.expect(Tok::Then)?;
                let a = self.expr()?;
                self.expect(Tok::Else)?;
                let b = self.expr()?;
                ExprKind::Ite(Box::new(c), Box::new(a), Box::new(b))
            }
            Tok::HashBracket => {
                self.bump();
                ExprKind::ArrayLit(self.args(Tok::RBracket)?)
            }
            Tok::LBracket => {
                self.bump();
                ExprKind::ListLit(self.args(Tok::RBracket)?)
            }
            Tok::LParen => {
                self.bump();
                let first = self.expr()?;
                if self.eat(&Tok::Comma) {
                    let second = self.expr()?;
                    self.expect(Tok::RParen)?;
                    ExprKind::Pair(Box::new(first), Box::new(second))
                } else if self.eat(&Tok::Colon) {
                    let ty = self.ty()?;
                    self.expect(Tok::RParen)?;
                    ExprKind::Cast(Box::new(first), ty)
                } else {
                    self.expect(Tok::RParen)?;
                    return Ok(first);
                }
            }
            Tok::Ident(name) => {
                self.bump();
                if name == "countRange" {
                    self.expect(Tok::LParen)?;
                    let lo = self.expr()?;
                    self.expect(Tok::Comma)?;
                    let hi = self.expr()?;
                    self.expect(Tok::Comma)?;
                    self.expect(Tok::Fun)?;
                    let var = self.ident()?;
                    self.expect(Tok::FatArrow)?;
                    let body = self.expr()?;
                    self.expect(Tok::RParen)?;
                    ExprKind::CountRange {
                        var,
                        lo: Box::new(lo),
                        hi: Box::new(hi),
                        body: Box::new(body),
                    }
                } else if self.at(&Tok::LParen) {
                    self.bump();
                    let args = self.args(Tok::RParen)?;
                    ExprKind::Call(name.as_str().into(), args)
                } else {
                    ExprKind::Var(name.as_str().into())
                }
            }
            other => return self.error(format!("expected expression, found {}", other.describe())),
        };
        Ok(Expr::new(kind, span))
    }

    pub fn finish(&mut self) -> PResult<()> {
        if self.at(&Tok::Eof) {
            Ok(())
        } else {
            let d = self.peek().describe();
            self.error(format!("unexpected {d}"))
        }
    }
}
