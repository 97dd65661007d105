use crate::sem::{eval_expr, Env, Value};
use crate::syntax::visit::{children_mut, free_vars};
use crate::syntax::{BinOp, Expr, ExprKind, NumKind, Program, UnOp};

/// Budget for evaluating one closed subexpression.
const FOLD_FUEL: u64 = 100_000;

fn literal(v: &Value) -> Option<ExprKind> {
    Some(match v {
        Value::Bool(b) => ExprKind::Bool(*b),
        Value::Nat(n) => ExprKind::Num(n.clone(), NumKind::Nat),
        Value::Int(n) => ExprKind::Num(n.clone(), NumKind::Int),
        Value::Char(c) => ExprKind::Char(*c),
        _ => return None,
    })
}

fn is_literal(e: &Expr) -> bool {
    matches!(e.kind, ExprKind::Bool(_) | ExprKind::Num(..) | ExprKind::Char(_) | ExprKind::Str(_))
}

fn as_bool(e: &Expr) -> Option<bool> {
    match e.kind {
        ExprKind::Bool(b) => Some(b),
        _ => None,
    }
}

fn simplify(e: &Expr) -> Option<Expr> {
    let b = |v: bool| Some(Expr::new(ExprKind::Bool(v), e.span));
    match &e.kind {
        ExprKind::Unary(UnOp::Not, a) => match &a.kind {
            ExprKind::Bool(v) => b(!v),
            ExprKind::Unary(UnOp::Not, inner) => Some((**inner).clone()),
            _ => None,
        },
        ExprKind::Binary(op, x, y) => {
            let (lx, ly) = (as_bool(x), as_bool(y));
            match op {
                BinOp::And => match (lx, ly) {
                    (Some(false), _) | (_, Some(false)) => b(false),
                    (Some(true), _) => Some((**y).clone()),
                    (_, Some(true)) => Some((**x).clone()),
                    _ if x == y => Some((**x).clone()),
                    _ => None,
                },
                BinOp::Or => match (lx, ly) {
                    (Some(true), _) | (_, Some(true)) => b(true),
                    (Some(false), _) => Some((**y).clone()),
                    (_, Some(false)) => Some((**x).clone()),
                    _ if x == y => Some((**x).clone()),
                    _ => None,
                },
                BinOp::Implies => match (lx, ly) {
                    (Some(false), _) | (_, Some(true)) => b(true),
                    (Some(true), _) => Some((**y).clone()),
                    (_, Some(false)) => Some(Expr::not((**x).clone())),
                    _ if x == y => b(true),
                    _ => None,
                },
                BinOp::Iff | BinOp::Eq | BinOp::Le | BinOp::Ge if x == y => b(true),
                BinOp::Ne | BinOp::Lt | BinOp::Gt if x == y => b(false),
                _ => None,
            }
        }
        ExprKind::Ite(c, x, y) => match as_bool(c) {
            Some(true) => Some((**x).clone()),
            Some(false) => Some((**y).clone()),
            None if x == y => Some((**x).clone()),
            None => None,
        },
        _ => None,
    }
}

fn go(prog: &Program, e: &mut Expr) {
    children_mut(e, &mut |c| go(prog, c));
    if let Some(s) = simplify(e) {
        *e = s;
        return;
    }
    if is_literal(e) || !free_vars(e).is_empty() {
        return;
    }
    if let Some(kind) = eval_expr(prog, &Env::new(), e, FOLD_FUEL).ok().as_ref().and_then(literal) {
        e.kind = kind;
    }
}

/// Bottom-up constant folding: closed scalar subterms are evaluated and
/// propositional structure is simplified, including `e = e` to `true`.
pub fn fold(prog: &Program, e: &Expr) -> Expr {
    let mut out = e.clone();
    go(prog, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, parse_expr_in, print_expr, SemType};

    fn folded(src: &str) -> String {
        let prog = parse("def sq (x : Nat) : Nat := x * x").unwrap();
        let vars = [("n".into(), SemType::Nat), ("b".into(), SemType::Bool)];
        let (e, _) = parse_expr_in(&prog, &vars, src).unwrap();
        print_expr(&fold(&prog, &e))
    }

    #[test]
    fn folds_closed_terms_and_reflexivity() {
        assert_eq!(folded("2 + 2 = 4"), "true");
        assert_eq!(folded("n = n"), "true");
        assert_eq!(folded("n < sq(3) ∧ true"), "n < 9");
        assert_eq!(folded("(1 > 2) → n = 7"), "true");
        assert_eq!(folded("b → false"), "¬b");
        assert_eq!(folded("∀ d : Nat, d < 3 → d * d < 5"), "true");
        assert_eq!(folded("if 1 < 2 then n else n + 1"), "n");
    }
}
