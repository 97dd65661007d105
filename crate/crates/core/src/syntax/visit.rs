//! Free variables, capture-avoiding substitution and traversal helpers.

use std::collections::{BTreeSet, HashMap};

use super::ast::*;

fn collect(e: &Expr, bound: &mut Vec<Ident>, out: &mut BTreeSet<Ident>) {
    match &e.kind {
        ExprKind::Var(v) => {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        }
        ExprKind::Quant(_, v, _, body) => {
            bound.push(v.clone());
            collect(body, bound, out);
            bound.pop();
        }
        ExprKind::CountRange { var, lo, hi, body } => {
            collect(lo, bound, out);
            collect(hi, bound, out);
            bound.push(var.clone());
            collect(body, bound, out);
            bound.pop();
        }
        _ => for_each_child(e, |c| collect(c, bound, out)),
    }
}

/// Variables occurring unbound in `e`. Definition names are not variables.
pub fn free_vars(e: &Expr) -> BTreeSet<Ident> {
    let mut out = BTreeSet::new();
    collect(e, &mut Vec::new(), &mut out);
    out
}

/// Calls `f` on each immediate subexpression, binders included.
pub fn for_each_child<'a>(e: &'a Expr, mut f: impl FnMut(&'a Expr)) {
    match &e.kind {
        ExprKind::Bool(_) | ExprKind::Num(..) | ExprKind::Char(_) | ExprKind::Str(_) | ExprKind::Var(_) => {}
        ExprKind::Unary(_, a) | ExprKind::Size(a) | ExprKind::Proj(a, _) | ExprKind::Cast(a, _) => f(a),
        ExprKind::Quant(_, _, _, a) => f(a),
        ExprKind::Binary(_, a, b) | ExprKind::Pair(a, b) => {
            f(a);
            f(b);
        }
        ExprKind::Index { base, index, .. } => {
            f(base);
            f(index);
        }
        ExprKind::ArrayLit(xs) | ExprKind::ListLit(xs) | ExprKind::Call(_, xs) => xs.iter().for_each(f),
        ExprKind::CountRange { lo, hi, body, .. } => {
            f(lo);
            f(hi);
            f(body);
        }
        ExprKind::Ite(c, a, b) => {
            f(c);
            f(a);
            f(b);
        }
    }
}

/// Applies `f` to each direct subexpression of `e`.
pub fn children_mut(e: &mut Expr, f: &mut dyn FnMut(&mut Expr)) {
    match &mut e.kind {
        ExprKind::Bool(_) | ExprKind::Num(..) | ExprKind::Char(_) | ExprKind::Str(_) | ExprKind::Var(_) => {}
        ExprKind::Unary(_, a) | ExprKind::Size(a) | ExprKind::Proj(a, _) | ExprKind::Cast(a, _) => f(a),
        ExprKind::Quant(_, _, _, a) => f(a),
        ExprKind::Binary(_, a, b) | ExprKind::Pair(a, b) => {
            f(a);
            f(b);
        }
        ExprKind::Index { base, index, .. } => {
            f(base);
            f(index);
        }
        ExprKind::ArrayLit(xs) | ExprKind::ListLit(xs) | ExprKind::Call(_, xs) => xs.iter_mut().for_each(&mut *f),
        ExprKind::CountRange { lo, hi, body, .. } => {
            f(lo);
            f(hi);
            f(body);
        }
        ExprKind::Ite(c, a, b) => {
            f(c);
            f(a);
            f(b);
        }
    }
}

/// Mutable pre-order traversal over every subexpression, `e` included.
pub fn walk_mut(e: &mut Expr, f: &mut dyn FnMut(&mut Expr)) {
    f(e);
    match &mut e.kind {
        ExprKind::Bool(_) | ExprKind::Num(..) | ExprKind::Char(_) | ExprKind::Str(_) | ExprKind::Var(_) => {}
        ExprKind::Unary(_, a) | ExprKind::Size(a) | ExprKind::Proj(a, _) | ExprKind::Cast(a, _) => walk_mut(a, f),
        ExprKind::Quant(_, _, _, a) => walk_mut(a, f),
        ExprKind::Binary(_, a, b) | ExprKind::Pair(a, b) => {
            walk_mut(a, f);
            walk_mut(b, f);
        }
        ExprKind::Index { base, index, .. } => {
            walk_mut(base, f);
            walk_mut(index, f);
        }
        ExprKind::ArrayLit(xs) | ExprKind::ListLit(xs) | ExprKind::Call(_, xs) => {
            xs.iter_mut().for_each(|x| walk_mut(x, f))
        }
        ExprKind::CountRange { lo, hi, body, .. } => {
            walk_mut(lo, f);
            walk_mut(hi, f);
            walk_mut(body, f);
        }
        ExprKind::Ite(c, a, b) => {
            walk_mut(c, f);
            walk_mut(a, f);
            walk_mut(b, f);
        }
    }
}

/// Visits every expression in a statement list, annotations included.
pub fn walk_block_mut(block: &mut [Stmt], f: &mut dyn FnMut(&mut Expr)) {
    for s in block {
        match &mut s.kind {
            StmtKind::Let { value, .. } | StmtKind::Assign { value, .. } => walk_mut(value, f),
            StmtKind::If { cond, then_block, else_block } => {
                walk_mut(cond, f);
                walk_block_mut(then_block, f);
                walk_block_mut(else_block, f);
            }
            StmtKind::While(lp) => {
                walk_mut(&mut lp.guard, f);
                for inv in lp.invariants.iter_mut() {
                    walk_mut(&mut inv.formula, f);
                }
                if let Some(m) = &mut lp.decreasing {
                    walk_mut(m, f);
                }
                walk_block_mut(&mut lp.body, f);
            }
            StmtKind::Return(values) => values.iter_mut().for_each(|v| walk_mut(v, f)),
        }
    }
}

/// Visits every expression of a program: definition bodies, contracts, method bodies.
pub fn walk_program_mut(p: &mut Program, f: &mut dyn FnMut(&mut Expr)) {
    for d in p.defs.iter_mut() {
        walk_mut(&mut d.body, f);
    }
    for m in p.methods.iter_mut() {
        for r in m.requires.iter_mut().chain(m.ensures.iter_mut()) {
            walk_mut(r, f);
        }
        walk_block_mut(&mut m.body, f);
    }
}

/// A variant of `base` not in `avoid`, made by appending primes.
pub fn fresh_name(base: &str, avoid: &BTreeSet<Ident>) -> Ident {
    let mut name = format!("{base}'");
    while avoid.iter().any(|a| **a == *name) {
        name.push('\'');
    }
    name.into()
}

/// Binder handling shared by quantifiers and `countRange`: returns the
/// (possibly renamed) binder and the substituted body.
fn subst_under(var: &Ident, body: &Expr, map: &HashMap<Ident, Expr>) -> (Ident, Expr) {
    let body_fv = free_vars(body);
    let inner: HashMap<Ident, Expr> = map
        .iter()
        .filter(|(k, _)| *k != var && body_fv.contains(*k))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    if inner.is_empty() {
        return (var.clone(), body.clone());
    }
    let incoming: BTreeSet<Ident> = inner.values().flat_map(free_vars).collect();
    if !incoming.contains(var) {
        return (var.clone(), subst(body, &inner));
    }
    let mut avoid = incoming;
    avoid.extend(body_fv);
    let renamed = fresh_name(var, &avoid);
    let mut rename = HashMap::new();
    rename.insert(var.clone(), Expr::var(&renamed));
    let body = subst(body, &rename);
    (renamed, subst(&body, &inner))
}

/// Capture-avoiding simultaneous substitution of variables.
pub fn subst(e: &Expr, map: &HashMap<Ident, Expr>) -> Expr {
    if map.is_empty() {
        return e.clone();
    }
    let span = e.span;
    let b = |x: &Expr| Box::new(subst(x, map));
    let kind = match &e.kind {
        ExprKind::Var(v) => match map.get(v) {
            Some(r) => return r.clone(),
            None => ExprKind::Var(v.clone()),
        },
        ExprKind::Bool(_) | ExprKind::Num(..) | ExprKind::Char(_) | ExprKind::Str(_) => e.kind.clone(),
        ExprKind::Unary(op, a) => ExprKind::Unary(*op, b(a)),
        ExprKind::Binary(op, x, y) => ExprKind::Binary(*op, b(x), b(y)),
        ExprKind::Index { base, index, elem } => {
            ExprKind::Index { base: b(base), index: b(index), elem: elem.clone() }
        }
        ExprKind::Size(a) => ExprKind::Size(b(a)),
        ExprKind::Proj(a, p) => ExprKind::Proj(b(a), *p),
        ExprKind::ArrayLit(xs) => ExprKind::ArrayLit(xs.iter().map(|x| subst(x, map)).collect()),
        ExprKind::ListLit(xs) => ExprKind::ListLit(xs.iter().map(|x| subst(x, map)).collect()),
        ExprKind::Pair(x, y) => ExprKind::Pair(b(x), b(y)),
        ExprKind::Call(f, xs) => ExprKind::Call(f.clone(), xs.iter().map(|x| subst(x, map)).collect()),
        ExprKind::CountRange { var, lo, hi, body } => {
            let (var, body) = subst_under(var, body, map);
            ExprKind::CountRange { var, lo: b(lo), hi: b(hi), body: Box::new(body) }
        }
        ExprKind::Quant(q, var, ty, body) => {
            let (var, body) = subst_under(var, body, map);
            ExprKind::Quant(*q, var, ty.clone(), Box::new(body))
        }
        ExprKind::Ite(c, x, y) => ExprKind::Ite(b(c), b(x), b(y)),
        ExprKind::Cast(a, t) => ExprKind::Cast(b(a), t.clone()),
    };
    Expr::new(kind, span)
}

/// Substitutes a single variable.
pub fn subst1(e: &Expr, name: &Ident, value: &Expr) -> Expr {
    let mut map = HashMap::new();
    map.insert(name.clone(), value.clone());
    subst(e, &map)
}
