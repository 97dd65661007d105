//! Canonical pretty-printer. Output reparses to an equal AST.

use std::fmt::Write;

use super::ast::*;

const PREC_IFF: u8 = 1;
const PREC_IMPLIES: u8 = 2;
const PREC_OR: u8 = 3;
const PREC_AND: u8 = 4;
const PREC_NOT: u8 = 5;
const PREC_CMP: u8 = 6;
const PREC_ADD: u8 = 7;
const PREC_MUL: u8 = 8;
const PREC_NEG: u8 = 9;
const PREC_POSTFIX: u8 = 10;
const PREC_ATOM: u8 = 11;

fn binop_prec(op: BinOp) -> u8 {
    match op {
        BinOp::Iff => PREC_IFF,
        BinOp::Implies => PREC_IMPLIES,
        BinOp::Or => PREC_OR,
        BinOp::And => PREC_AND,
        BinOp::Add | BinOp::Sub => PREC_ADD,
        BinOp::Mul | BinOp::Div | BinOp::Mod => PREC_MUL,
        _ => PREC_CMP,
    }
}

fn escape(c: char, quote: char, out: &mut String) {
    match c {
        '\n' => out.push_str("\\n"),
        '\t' => out.push_str("\\t"),
        '\\' => out.push_str("\\\\"),
        c if c == quote => {
            out.push('\\');
            out.push(c);
        }
        c => out.push(c),
    }
}

fn expr_prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary(op, ..) => binop_prec(*op),
        ExprKind::Unary(UnOp::Not, _) => PREC_NOT,
        ExprKind::Unary(UnOp::Neg, _) => PREC_NEG,
        ExprKind::Num(n, _) if n.is_negative() => PREC_NEG,
        ExprKind::Index { .. } | ExprKind::Size(_) | ExprKind::Proj(..) => PREC_POSTFIX,
        ExprKind::Quant(..) | ExprKind::Ite(..) => 0,
        _ => PREC_ATOM,
    }
}

fn write_expr(e: &Expr, min: u8, out: &mut String) {
    let prec = expr_prec(e);
    let wrap = prec < min;
    if wrap {
        out.push('(');
    }
    match &e.kind {
        ExprKind::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        ExprKind::Num(n, _) => {
            let _ = write!(out, "{n}");
        }
        ExprKind::Char(c) => {
            out.push('\'');
            escape(*c, '\'', out);
            out.push('\'');
        }
        ExprKind::Str(s) => {
            out.push('"');
            for c in s.chars() {
                escape(c, '"', out);
            }
            out.push('"');
        }
        ExprKind::Var(v) => out.push_str(v),
        ExprKind::Unary(UnOp::Not, a) => {
            out.push('¬');
            write_expr(a, PREC_NOT, out);
        }
        ExprKind::Unary(UnOp::Neg, a) => {
            out.push('-');
            let starts_negative = matches!(&a.kind, ExprKind::Unary(UnOp::Neg, _))
                || matches!(&a.kind, ExprKind::Num(n, _) if n.is_negative());
            write_expr(a, if starts_negative { PREC_ATOM } else { PREC_NEG }, out);
        }
        ExprKind::Binary(op, a, b) => {
            let p = binop_prec(*op);
            let (lp, rp) = match op {
                BinOp::Iff | BinOp::Implies => (p + 1, p),
                _ if op.is_comparison() => (p + 1, p + 1),
                _ => (p, p + 1),
            };
            write_expr(a, lp, out);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(b, rp, out);
        }
        ExprKind::Index { base, index, .. } => {
            write_expr(base, PREC_POSTFIX, out);
            out.push('[');
            write_expr(index, 0, out);
            out.push_str("]!");
        }
        ExprKind::Size(a) => {
            write_expr(a, PREC_POSTFIX, out);
            out.push_str(".size");
        }
        ExprKind::Proj(a, p) => {
            write_expr(a, PREC_POSTFIX, out);
            out.push_str(if *p == Proj::First { ".1" } else { ".2" });
        }
        ExprKind::ArrayLit(xs) | ExprKind::ListLit(xs) => {
            out.push_str(if matches!(e.kind, ExprKind::ArrayLit(_)) { "#[" } else { "[" });
            write_list(xs, out);
            out.push(']');
        }
        ExprKind::Pair(a, b) => {
            out.push('(');
            write_expr(a, 0, out);
            out.push_str(", ");
            write_expr(b, 0, out);
            out.push(')');
        }
        ExprKind::Call(f, args) => {
            out.push_str(f);
            out.push('(');
            write_list(args, out);
            out.push(')');
        }
        ExprKind::CountRange { var, lo, hi, body } => {
            out.push_str("countRange(");
            write_expr(lo, 0, out);
            out.push_str(", ");
            write_expr(hi, 0, out);
            let _ = write!(out, ", fun {var} => ");
            write_expr(body, 0, out);
            out.push(')');
        }
        ExprKind::Quant(q, v, ty, body) => {
            let sym = if *q == Quantifier::Forall { '∀' } else { '∃' };
            let _ = write!(out, "{sym} {v} : {ty}, ");
            write_expr(body, 0, out);
        }
        ExprKind::Ite(c, a, b) => {
            out.push_str("if ");
            write_expr(c, 0, out);
            out.push_str(" then ");
            write_expr(a, 0, out);
            out.push_str(" else ");
            write_expr(b, 0, out);
        }
        ExprKind::Cast(a, ty) => {
            out.push('(');
            write_expr(a, 0, out);
            let _ = write!(out, " : {ty})");
        }
    }
    if wrap {
        out.push(')');
    }
}

fn write_list(xs: &[Expr], out: &mut String) {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(x, 0, out);
    }
}

pub fn expr_to_string(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(e, 0, &mut s);
    s
}

fn write_params(params: &[Param], out: &mut String) {
    for p in params {
        let _ = write!(out, " ({} : {})", p.name, p.ty);
    }
}

fn indent(depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn write_block(block: &[Stmt], depth: usize, out: &mut String) {
    for s in block {
        write_stmt(s, depth, out);
    }
}

fn write_stmt(s: &Stmt, depth: usize, out: &mut String) {
    indent(depth, out);
    match &s.kind {
        StmtKind::Let { name, mutable, ty, value } => {
            out.push_str("let ");
            if *mutable {
                out.push_str("mut ");
            }
            out.push_str(name);
            if let Some(t) = ty {
                let _ = write!(out, " : {t}");
            }
            out.push_str(" := ");
            write_expr(value, 0, out);
            out.push('\n');
        }
        StmtKind::Assign { name, value } => {
            let _ = write!(out, "{name} := ");
            write_expr(value, 0, out);
            out.push('\n');
        }
        StmtKind::If { cond, then_block, else_block } => {
            out.push_str("if ");
            write_expr(cond, 0, out);
            out.push_str(" then\n");
            write_block(then_block, depth + 1, out);
            if !else_block.is_empty() {
                indent(depth, out);
                out.push_str("else\n");
                write_block(else_block, depth + 1, out);
            }
            indent(depth, out);
            out.push_str("end\n");
        }
        StmtKind::While(lp) => {
            out.push_str("while ");
            write_expr(&lp.guard, 0, out);
            out.push('\n');
            for inv in &lp.invariants {
                indent(depth + 1, out);
                out.push_str("invariant ");
                if let Some(l) = &inv.label {
                    out.push('"');
                    for c in l.chars() {
                        escape(c, '"', out);
                    }
                    out.push_str("\" ");
                }
                write_expr(&inv.formula, 0, out);
                out.push('\n');
            }
            if let Some(m) = &lp.decreasing {
                indent(depth + 1, out);
                out.push_str("decreasing ");
                write_expr(m, 0, out);
                out.push('\n');
            }
            indent(depth, out);
            out.push_str("do\n");
            write_block(&lp.body, depth + 1, out);
            indent(depth, out);
            out.push_str("end\n");
        }
        StmtKind::Return(values) => {
            if values.is_empty() {
                out.push_str("return;\n");
            } else {
                out.push_str("return ");
                write_list(values, out);
                out.push('\n');
            }
        }
    }
}

pub fn def_to_string(d: &PureDef) -> String {
    let mut out = String::new();
    let _ = write!(out, "def {}", d.name);
    write_params(&d.params, &mut out);
    match &d.result {
        DefResult::Prop => out.push_str(" : Prop :=\n  "),
        DefResult::Value(t) => {
            let _ = write!(out, " : {t} :=\n  ");
        }
    }
    write_expr(&d.body, 0, &mut out);
    out.push('\n');
    out
}

pub fn method_to_string(m: &Method) -> String {
    let mut out = String::new();
    let _ = write!(out, "method {}", m.name);
    write_params(&m.params, &mut out);
    if !m.returns.is_empty() {
        out.push_str(" return");
        write_params(&m.returns, &mut out);
    }
    out.push('\n');
    for r in &m.requires {
        out.push_str("  require ");
        write_expr(r, 0, &mut out);
        out.push('\n');
    }
    for e in &m.ensures {
        out.push_str("  ensures ");
        write_expr(e, 0, &mut out);
        out.push('\n');
    }
    out.push_str("do\n");
    write_block(&m.body, 1, &mut out);
    out.push_str("end\n");
    out
}

/// Renders a whole program: definitions first, then methods.
pub fn print(p: &Program) -> String {
    let items: Vec<String> = p
        .defs
        .iter()
        .map(def_to_string)
        .chain(p.methods.iter().map(method_to_string))
        .collect();
    items.join("\n")
}
