use std::collections::BTreeSet;

use proptest::prelude::*;
use vtkit::syntax::visit::free_vars;
use vtkit::syntax::{parse, parse_expr_in, print, print_expr, Ident, Program, SemType, Stmt, StmtKind};

const FIXTURES: &[&str] = &[
    include_str!("../fixtures/id.vt"),
    include_str!("../fixtures/is_non_prime.vt"),
    include_str!("../fixtures/rotated.vt"),
    include_str!("../fixtures/rotated_bad_invariant.vt"),
    include_str!("../fixtures/rotated_spec.vt"),
    include_str!("../fixtures/rotated_spec_weak.vt"),
    include_str!("../fixtures/linear.vt"),
];

#[test]
fn fixtures_round_trip() {
    for src in FIXTURES {
        let p = parse(src).unwrap();
        let text = print(&p);
        let q = parse(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
        assert_eq!(p, q);
        assert_eq!(text, print(&q));
    }
}

fn block_names(block: &[Stmt], scope: &mut BTreeSet<Ident>, unresolved: &mut Vec<Ident>) {
    fn check(e: &vtkit::syntax::Expr, scope: &BTreeSet<Ident>, unresolved: &mut Vec<Ident>) {
        unresolved.extend(free_vars(e).into_iter().filter(|v| !scope.contains(v)));
    }
    for s in block {
        match &s.kind {
            StmtKind::Let { name, value, .. } => {
                check(value, scope, unresolved);
                scope.insert(name.clone());
            }
            StmtKind::Assign { name, value } => {
                check(value, scope, unresolved);
                if !scope.contains(name) {
                    unresolved.push(name.clone());
                }
            }
            StmtKind::If { cond, then_block, else_block } => {
                check(cond, scope, unresolved);
                block_names(then_block, &mut scope.clone(), unresolved);
                block_names(else_block, &mut scope.clone(), unresolved);
            }
            StmtKind::While(lp) => {
                check(&lp.guard, scope, unresolved);
                for inv in &lp.invariants {
                    check(&inv.formula, scope, unresolved);
                }
                if let Some(d) = &lp.decreasing {
                    check(d, scope, unresolved);
                }
                block_names(&lp.body, &mut scope.clone(), unresolved);
            }
            StmtKind::Return(vs) => vs.iter().for_each(|v| check(v, scope, unresolved)),
        }
    }
}

fn unresolved(p: &Program) -> Vec<Ident> {
    let mut out = Vec::new();
    for d in &p.defs {
        let params: BTreeSet<Ident> = d.params.iter().map(|p| p.name.clone()).collect();
        out.extend(free_vars(&d.body).into_iter().filter(|v| !params.contains(v)));
    }
    for m in &p.methods {
        let mut scope: BTreeSet<Ident> = m.params.iter().map(|p| p.name.clone()).collect();
        for r in &m.requires {
            out.extend(free_vars(r).into_iter().filter(|v| !scope.contains(v)));
        }
        let with_returns: BTreeSet<Ident> = scope.iter().cloned().chain(m.returns.iter().map(|p| p.name.clone())).collect();
        for e in &m.ensures {
            out.extend(free_vars(e).into_iter().filter(|v| !with_returns.contains(v)));
        }
        block_names(&m.body, &mut scope, &mut out);
    }
    out
}

#[test]
fn fixtures_have_no_unresolved_names() {
    for src in FIXTURES {
        assert_eq!(unresolved(&parse(src).unwrap()), Vec::<Ident>::new());
    }
}

#[test]
fn undefined_names_are_rejected() {
    assert!(parse("method M (n : Nat) return (r : Nat) do return m end").is_err());
    assert!(parse("def f (n : Nat) : Nat := g(n)").is_err());
}

#[test]
fn duplicate_labels_are_rejected() {
    let src = |second: &str| {
        format!(
            "method M (n : Nat) return (r : Nat) do let mut i : Nat := 0 \
             while i < n invariant \"a\" i ≤ n invariant \"{second}\" i ≥ 0 do i := i + 1 end return i end"
        )
    };
    assert!(parse(&src("b")).is_ok());
    let err = parse(&src("a")).unwrap_err();
    assert!(err.to_string().contains("a"), "{err}");
}

fn nat_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![(0u32..20).prop_map(|n| n.to_string()), Just("n".to_string()), Just("a.size".to_string())];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), prop::sample::select(vec!["+", "-", "*", "/", "%"]), inner.clone())
                .prop_map(|(l, op, r)| format!("({l} {op} {r})")),
            (inner.clone(), inner).prop_map(|(lo, hi)| format!("countRange({lo}, {hi}, fun k => k % 2 = 0)")),
        ]
    })
}

fn int_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (-20i32..20).prop_map(|n| n.to_string()),
        Just("x".to_string()),
        Just("y".to_string()),
        nat_expr().prop_map(|e| format!("({e} : Int)")),
        nat_expr().prop_map(|e| format!("a[{e}]!")),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), prop::sample::select(vec!["+", "-", "*", "/", "%"]), inner.clone())
                .prop_map(|(l, op, r)| format!("({l} {op} {r})")),
            inner.clone().prop_map(|e| format!("(-({e}))")),
            (bool_leaf(), inner.clone(), inner).prop_map(|(c, t, e)| format!("(if {c} then {t} else {e})")),
        ]
    })
}

fn bool_leaf() -> impl Strategy<Value = String> {
    prop_oneof![Just("true".to_string()), Just("b".to_string()), Just("x < y".to_string())]
}

fn bool_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        bool_leaf(),
        (int_expr(), prop::sample::select(vec!["<", "≤", ">", "≥", "=", "≠"]), int_expr())
            .prop_map(|(l, op, r)| format!("{l} {op} {r}")),
        (nat_expr(), int_expr()).prop_map(|(hi, v)| format!("(∀ k : Nat, k < {hi} → a[k]! ≥ {v})")),
        (nat_expr(), int_expr()).prop_map(|(hi, v)| format!("(∃ k : Nat, k < {hi} ∧ a[k]! = {v})")),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| format!("¬({e})")),
            (inner.clone(), prop::sample::select(vec!["∧", "∨", "→", "↔"]), inner).prop_map(|(l, op, r)| format!("({l}) {op} ({r})")),
        ]
    })
}

fn vars() -> Vec<(Ident, SemType)> {
    vec![
        ("x".into(), SemType::Int),
        ("y".into(), SemType::Int),
        ("n".into(), SemType::Nat),
        ("b".into(), SemType::Bool),
        ("a".into(), SemType::array(SemType::Int)),
    ]
}

proptest! {
    #[test]
    fn expressions_round_trip(src in bool_expr()) {
        let prog = parse("").unwrap();
        let (e1, t1) = parse_expr_in(&prog, &vars(), &src).unwrap();
        let printed = print_expr(&e1);
        let (e2, t2) = parse_expr_in(&prog, &vars(), &printed).unwrap();
        prop_assert_eq!(&e1, &e2, "{}", printed);
        prop_assert_eq!(t1, t2);
        prop_assert_eq!(printed, print_expr(&e2));
    }
}
