//! Parser, validator, and pretty-printer for the action-language dialect.
//!
//! Domain descriptions are UTF-8 documents (extension `.kat`) with four
//! sections: `sorts`, `predicates`, `rules`, and `resolutions`. Statements
//! end in `.`, comments run from `%` to end of line, variables are
//! capitalized, constants lowercase. `-` is classical negation, `not` is
//! default negation, and a `*` suffix on a predicate name marks it as
//! belonging to the coarse-resolution description. The full grammar is
//! documented in `docs/rulelang.md`.

pub mod ast;
mod lexer;
mod parser;
mod printer;
mod validate;

pub use ast::{
    Atom, BodyElem, DomainDescription, HistoryEntry, Literal, PredDecl, PredKind, Resolution,
    ResolutionDecl, Rule, Sign, SortDecl, SortSpec, Span, Term,
};
pub use printer::{pretty_print, print_history};
pub use validate::{build_sort_table, SortTable};

use thiserror::Error;

/// Lexical, syntactic, or validation error with source position.
#[derive(Debug, Clone, Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: Span,
    pub message: String,
}

/// Parse and validate a complete domain document.
pub fn parse_domain(text: &str) -> Result<DomainDescription, ParseError> {
    let mut p = parser::Parser::new(text)?;
    let raw = p.parse_domain()?;
    validate::validate(raw)
}

/// Parse a history document and validate it against a domain's signature.
pub fn parse_history(text: &str, d: &DomainDescription) -> Result<Vec<HistoryEntry>, ParseError> {
    let mut p = parser::Parser::new(text)?;
    let entries = p.parse_history()?;
    validate::validate_history(&entries, d)?;
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = "
sorts
  robot = {aha}.
  x_val = 0..3.
  y_val = 0..3.

predicates
  inertial loc(robot, x_val, y_val).
  inertial alive(robot).
  action move(robot, x_val, y_val).
  static next_to(x_val, y_val, x_val, y_val).

rules
  move(R, X, Y) causes loc(R, X, Y) if alive(R).
  impossible move(R, X2, Y2) if loc(R, X1, Y1), not next_to(X1, Y1, X2, Y2).
  next_to(0, 0, 0, 1).
";

    #[test]
    fn parses_causal_law_shape() {
        let d = parse_domain(TINY).unwrap();
        let law = d
            .rules
            .iter()
            .find_map(|r| match r {
                Rule::CausalLaw { action, head, body } => Some((action, head, body)),
                _ => None,
            })
            .unwrap();
        assert_eq!(law.0.pred, "move");
        assert_eq!(law.1.atom.pred, "loc");
        assert_eq!(law.2.len(), 1);
    }

    #[test]
    fn executability_carries_default_negation() {
        let d = parse_domain(TINY).unwrap();
        let imp = d
            .rules
            .iter()
            .find_map(|r| match r {
                Rule::Executability { action, body } => Some((action, body)),
                _ => None,
            })
            .unwrap();
        assert_eq!(imp.0.pred, "move");
        assert!(matches!(
            imp.1.last().unwrap(),
            BodyElem::Lit { default_neg: true, .. }
        ));
    }

    #[test]
    fn empty_rules_section_is_fine() {
        let d = parse_domain("sorts\n a = {x}.\npredicates\n inertial p(a).\nrules\n").unwrap();
        assert!(d.rules.is_empty());
    }

    #[test]
    fn empty_document_parses() {
        let d = parse_domain("").unwrap();
        assert_eq!(d, DomainDescription::default());
    }

    #[test]
    fn round_trips_tiny_domain() {
        let d = parse_domain(TINY).unwrap();
        let printed = pretty_print(&d);
        let d2 = parse_domain(&printed).unwrap();
        assert_eq!(d, d2);
    }

    #[test]
    fn round_trips_default_negation() {
        let d = parse_domain(TINY).unwrap();
        let printed = pretty_print(&d);
        assert!(printed.contains("not next_to(X1, Y1, X2, Y2)"));
        assert_eq!(parse_domain(&printed).unwrap(), d);
    }

    #[test]
    fn zero_rules_prints_signature_only() {
        let d = parse_domain("sorts\n a = {x}.\npredicates\n inertial p(a).\n").unwrap();
        let printed = pretty_print(&d);
        assert!(printed.contains("sorts"));
        assert!(printed.contains("predicates"));
        assert!(!printed.contains("rules"));
        assert_eq!(parse_domain(&printed).unwrap(), d);
    }

    #[test]
    fn rejects_undeclared_predicate_with_position() {
        let src = "sorts\n a = {x}.\npredicates\n inertial p(a).\nrules\n  q(x) if p(x).\n";
        let e = parse_domain(src).unwrap_err();
        assert!(e.message.contains("undeclared predicate `q`"));
        assert_eq!(e.span.line, 6);
        assert_eq!(e.span.col, 3);
    }

    #[test]
    fn rejects_arity_mismatch() {
        let src = "sorts\n a = {x}.\npredicates\n inertial p(a).\nrules\n  p(x, x) if p(x).\n";
        let e = parse_domain(src).unwrap_err();
        assert!(e.message.contains("arity mismatch"));
    }

    #[test]
    fn rejects_cyclic_sorts() {
        let src = "sorts\n a = b + c.\n b = a + c.\n c = {k}.\n";
        let e = parse_domain(src).unwrap_err();
        assert!(e.message.contains("cyclic sort graph"));
    }

    #[test]
    fn rejects_causal_law_with_defined_head() {
        let src = "sorts
  a = {x}.
predicates
  defined d(a).
  action act(a).
rules
  act(X) causes d(X).
";
        let e = parse_domain(src).unwrap_err();
        assert!(e.message.contains("must be an inertial fluent"));
    }

    #[test]
    fn rejects_action_in_constraint_body() {
        let src = "sorts
  a = {x}.
predicates
  inertial p(a).
  action act(a).
rules
  p(X) if act(X).
";
        let e = parse_domain(src).unwrap_err();
        assert!(e.message.contains("not allowed in constraint body"));
    }

    #[test]
    fn rejects_cr_rule_without_matching_default() {
        let src = "sorts
  a = {x}.
predicates
  inertial p(a).
rules
  cr-rule -p(X).
";
        let e = parse_domain(src).unwrap_err();
        assert!(e.message.contains("negate exactly one default"));
    }

    #[test]
    fn parses_history_records() {
        let d = parse_domain(TINY).unwrap();
        let h = parse_history(
            "hpd(move(aha, 3, 3), 0).\nobs(loc(aha, 3, 2), true, 0).\n",
            &d,
        )
        .unwrap();
        assert_eq!(h.len(), 2);
        // Sorted by step, document order within a step.
        assert!(matches!(&h[0], HistoryEntry::Hpd { step: 0, .. }));
        assert!(matches!(
            &h[1],
            HistoryEntry::Obs { value: true, step: 0, .. }
        ));
    }

    #[test]
    fn empty_history_is_empty() {
        let d = parse_domain(TINY).unwrap();
        assert!(parse_history("", &d).unwrap().is_empty());
    }

    #[test]
    fn history_rejects_unknown_fluent() {
        let d = parse_domain(TINY).unwrap();
        let e = parse_history("obs(gone(aha), true, 0).", &d).unwrap_err();
        assert!(e.message.contains("undeclared predicate"));
    }

    #[test]
    fn history_rejects_negative_step() {
        let d = parse_domain(TINY).unwrap();
        let e = parse_history("obs(loc(aha, 0, 0), true, -1).", &d).unwrap_err();
        assert!(e.message.contains("non-negative"));
    }
}
