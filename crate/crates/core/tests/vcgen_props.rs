use std::collections::BTreeSet;

use vtkit::syntax::parse;
use vtkit::vcgen::{generate_vcs, render_vc, CorrectnessMode, VcKind};

const FIXTURES: &[&str] = &[
    include_str!("../fixtures/id.vt"),
    include_str!("../fixtures/is_non_prime.vt"),
    include_str!("../fixtures/rotated.vt"),
    include_str!("../fixtures/rotated_bad_invariant.vt"),
    include_str!("../fixtures/linear.vt"),
];

#[test]
fn generation_is_stable() {
    for src in FIXTURES {
        let (a, b) = (parse(src).unwrap(), parse(src).unwrap());
        for m in &a.methods {
            for mode in [CorrectnessMode::Partial, CorrectnessMode::Total] {
                let x = generate_vcs(&a, &m.name, mode).unwrap();
                let y = generate_vcs(&b, &m.name, mode).unwrap();
                assert_eq!(x, y);
                let tx: Vec<String> = x.iter().map(render_vc).collect();
                let ty: Vec<String> = y.iter().map(render_vc).collect();
                assert_eq!(tx, ty);
            }
        }
    }
}

#[test]
fn partial_vcs_are_a_subset_of_total_vcs() {
    for src in FIXTURES {
        let p = parse(src).unwrap();
        for m in &p.methods {
            let partial = generate_vcs(&p, &m.name, CorrectnessMode::Partial).unwrap();
            let total = generate_vcs(&p, &m.name, CorrectnessMode::Total).unwrap();
            for vc in &partial {
                assert!(total.contains(vc), "{} missing in total mode", vc.id);
            }
            assert!(total.iter().filter(|vc| !partial.contains(vc)).all(|vc| {
                matches!(vc.kind, VcKind::MeasureDecreases | VcKind::MeasureNonNegative)
            }));
        }
    }
}

#[test]
fn rendering_is_injective() {
    for src in FIXTURES {
        let p = parse(src).unwrap();
        for m in &p.methods {
            let vcs = generate_vcs(&p, &m.name, CorrectnessMode::Total).unwrap();
            let texts: BTreeSet<String> = vcs.iter().map(render_vc).collect();
            let ids: BTreeSet<&String> = vcs.iter().map(|vc| &vc.id).collect();
            assert_eq!((texts.len(), ids.len()), (vcs.len(), vcs.len()));
        }
    }
}

#[test]
fn is_non_prime_total_kinds() {
    let p = parse(FIXTURES[1]).unwrap();
    let kinds: BTreeSet<VcKind> = generate_vcs(&p, "IsNonPrime", CorrectnessMode::Total).unwrap().iter().map(|vc| vc.kind).collect();
    for k in [
        VcKind::InvariantEntry,
        VcKind::InvariantPreserved,
        VcKind::PostOnExit,
        VcKind::PostOnReturn,
        VcKind::MeasureDecreases,
        VcKind::MeasureNonNegative,
    ] {
        assert!(kinds.contains(&k), "{k}");
    }
}

#[test]
fn nat_measures_need_no_nonnegativity_vc() {
    let p = parse(FIXTURES[2]).unwrap();
    let vcs = generate_vcs(&p, "CheckSortedAndRotated", CorrectnessMode::Total).unwrap();
    assert!(vcs.iter().all(|vc| vc.kind != VcKind::MeasureNonNegative));
    assert!(vcs.iter().any(|vc| vc.kind == VcKind::MeasureDecreases));
}
