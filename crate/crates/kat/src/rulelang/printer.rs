//! Canonical pretty-printer; output re-parses to a structurally equal
//! description (round-trip law).

use super::ast::*;
use std::fmt::Write;

fn write_body(out: &mut String, body: &[BodyElem]) {
    if body.is_empty() {
        return;
    }
    out.push_str(" if ");
    for (i, e) in body.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{e}");
    }
}

pub fn pretty_print(d: &DomainDescription) -> String {
    let mut out = String::new();

    if !d.sorts.is_empty() {
        out.push_str("sorts\n");
        for s in &d.sorts {
            let _ = write!(out, "  {} = ", s.name);
            match &s.spec {
                SortSpec::Members(ms) => {
                    out.push('{');
                    for (i, m) in ms.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        out.push_str(m);
                    }
                    out.push('}');
                }
                SortSpec::Range(lo, hi) => {
                    let _ = write!(out, "{lo}..{hi}");
                }
                SortSpec::Union(parts) => {
                    let _ = write!(out, "{}", parts.join(" + "));
                }
            }
            out.push_str(".\n");
        }
        out.push('\n');
    }

    if !d.predicates.is_empty() {
        out.push_str("predicates\n");
        for p in &d.predicates {
            out.push_str("  ");
            if p.resolution == Resolution::Coarse {
                out.push_str("coarse ");
            }
            out.push_str(p.kind.keyword());
            let _ = write!(out, " {}", p.name);
            if !p.arg_sorts.is_empty() {
                let _ = write!(out, "({})", p.arg_sorts.join(", "));
            }
            out.push_str(".\n");
        }
        out.push('\n');
    }

    if !d.rules.is_empty() {
        out.push_str("rules\n");
        for r in &d.rules {
            out.push_str("  ");
            match r {
                Rule::CausalLaw { action, head, body } => {
                    let _ = write!(out, "{action} causes {head}");
                    write_body(&mut out, body);
                }
                Rule::StateConstraint { head, body } | Rule::BridgeAxiom { head, body } => {
                    let _ = write!(out, "{head}");
                    write_body(&mut out, body);
                }
                Rule::Executability { action, body } => {
                    let _ = write!(out, "impossible {action}");
                    write_body(&mut out, body);
                }
                Rule::InitialDefault { head, body } => {
                    let _ = write!(out, "initial default {head}");
                    write_body(&mut out, body);
                }
                Rule::CrRule { head, body } => {
                    let _ = write!(out, "cr-rule {head}");
                    write_body(&mut out, body);
                }
                Rule::CostDecl { action, cost } => {
                    let _ = write!(out, "cost {action} = {cost}");
                }
                Rule::GoalDecl { targets, when } => {
                    out.push_str("goal ");
                    for (i, t) in targets.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        let _ = write!(out, "{t}");
                    }
                    write_body(&mut out, when);
                }
                Rule::Fact { atom } => {
                    let _ = write!(out, "{atom}");
                }
            }
            out.push_str(".\n");
        }
        out.push('\n');
    }

    if !d.resolutions.is_empty() {
        out.push_str("resolutions\n");
        for rd in &d.resolutions {
            match rd {
                ResolutionDecl::RegionRect { name, x, y, .. } => {
                    let _ = writeln!(out, "  region {} = ({}..{}, {}..{}).", name, x.0, x.1, y.0, y.1);
                }
                ResolutionDecl::Component { x, y, region, .. } => {
                    let _ = writeln!(out, "  component({x}, {y}, {region}).");
                }
            }
        }
        out.push('\n');
    }

    out
}

pub fn print_history(entries: &[HistoryEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        let _ = writeln!(out, "{e}");
    }
    out
}
