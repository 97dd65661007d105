use std::fmt::Write;

use super::VerificationCondition;
use crate::syntax::print_expr;

/// Renders a VC as a self-contained, theorem-like text.
pub fn render_vc(vc: &VerificationCondition) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "vc {}", vc.id);
    let _ = writeln!(out, "kind: {}", vc.kind);
    let _ = writeln!(out, "method: {}", vc.method);
    out.push_str("binders:\n");
    for (name, ty) in &vc.binders {
        let _ = writeln!(out, "  ({name} : {ty})");
    }
    out.push_str("hypotheses:\n");
    for (name, h) in &vc.hypotheses {
        let _ = writeln!(out, "  ({name} : {})", print_expr(h));
    }
    let _ = writeln!(out, "goal: {}", print_expr(&vc.goal));
    out
}
