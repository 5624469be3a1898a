//! Recursive-descent parser for domain and history documents.

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::ParseError;

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

/// Words that may not be used as predicate or sort names; they carry
/// structural meaning at statement or body positions.
pub const RESERVED: &[&str] = &["causes", "if", "not", "impossible", "initial", "default", "cost", "goal"];

impl Parser {
    pub fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(text)?, pos: 0 })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|t| &t.tok)
    }

    fn span(&self) -> Span {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|t| t.span)
            .unwrap_or_default()
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { span: self.span(), message: message.into() })
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<Span, ParseError> {
        match self.peek() {
            Some(t) if t == want => Ok(self.bump().unwrap().span),
            Some(t) => {
                let got = t.describe();
                self.err(format!("expected {what}, found {got}"))
            }
            None => self.err(format!("expected {what}, found end of input")),
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, Span), ParseError> {
        match self.peek() {
            Some(Tok::Ident(_)) => {
                let t = self.bump().unwrap();
                if let Tok::Ident(s) = t.tok {
                    Ok((s, t.span))
                } else {
                    unreachable!()
                }
            }
            Some(t) => {
                let got = t.describe();
                self.err(format!("expected {what}, found {got}"))
            }
            None => self.err(format!("expected {what}, found end of input")),
        }
    }

    fn expect_num(&mut self, what: &str) -> Result<(i64, Span), ParseError> {
        // Accept an optional leading minus.
        let neg = if self.peek() == Some(&Tok::Minus) {
            self.bump();
            true
        } else {
            false
        };
        match self.peek() {
            Some(Tok::Num(_)) => {
                let t = self.bump().unwrap();
                if let Tok::Num(n) = t.tok {
                    Ok((if neg { -n } else { n }, t.span))
                } else {
                    unreachable!()
                }
            }
            Some(t) => {
                let got = t.describe();
                self.err(format!("expected {what}, found {got}"))
            }
            None => self.err(format!("expected {what}, found end of input")),
        }
    }

    fn at_ident(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == word)
    }

    fn eat_ident(&mut self, word: &str) -> bool {
        if self.at_ident(word) {
            self.bump();
            true
        } else {
            false
        }
    }

    // ---- terms, atoms, literals, bodies -------------------------------

    fn parse_term(&mut self) -> Result<Term, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) => {
                self.bump();
                Ok(Term::Const(s))
            }
            Some(Tok::Var(s)) => {
                self.bump();
                Ok(Term::Var(s))
            }
            Some(Tok::Num(n)) => {
                self.bump();
                Ok(Term::Num(n))
            }
            Some(Tok::Minus) => {
                self.bump();
                let (n, _) = self.expect_num("number after `-`")?;
                Ok(Term::Num(-n))
            }
            Some(t) => {
                let got = t.describe();
                self.err(format!("expected term, found {got}"))
            }
            None => self.err("expected term, found end of input"),
        }
    }

    fn parse_atom(&mut self) -> Result<Atom, ParseError> {
        let (pred, span) = self.expect_ident("predicate name")?;
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.bump();
            loop {
                args.push(self.parse_term()?);
                match self.peek() {
                    Some(Tok::Comma) => {
                        self.bump();
                    }
                    Some(Tok::RParen) => {
                        self.bump();
                        break;
                    }
                    _ => return self.err("expected `,` or `)` in argument list"),
                }
            }
        }
        Ok(Atom { pred, args, span })
    }

    fn parse_literal(&mut self) -> Result<Literal, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.bump();
            Ok(Literal::neg(self.parse_atom()?))
        } else {
            Ok(Literal::pos(self.parse_atom()?))
        }
    }

    fn parse_body_elem(&mut self) -> Result<BodyElem, ParseError> {
        if self.at_ident("not") {
            self.bump();
            return Ok(BodyElem::Lit { default_neg: true, lit: self.parse_literal()? });
        }
        match self.peek() {
            // A variable or number can only open a comparison.
            Some(Tok::Var(_)) | Some(Tok::Num(_)) => {
                let lhs = self.parse_term()?;
                self.parse_comparison(lhs)
            }
            Some(Tok::Minus) => {
                // `-3 != X` (number) vs `-p(X)` (negated literal).
                if matches!(self.peek2(), Some(Tok::Num(_))) {
                    let lhs = self.parse_term()?;
                    self.parse_comparison(lhs)
                } else {
                    Ok(BodyElem::Lit { default_neg: false, lit: self.parse_literal()? })
                }
            }
            Some(Tok::Ident(_)) => {
                let atom = self.parse_atom()?;
                if atom.args.is_empty()
                    && matches!(self.peek(), Some(Tok::Neq) | Some(Tok::Eq))
                {
                    self.parse_comparison(Term::Const(atom.pred))
                } else {
                    Ok(BodyElem::Lit { default_neg: false, lit: Literal::pos(atom) })
                }
            }
            Some(t) => {
                let got = t.describe();
                self.err(format!("expected body element, found {got}"))
            }
            None => self.err("expected body element, found end of input"),
        }
    }

    fn parse_comparison(&mut self, lhs: Term) -> Result<BodyElem, ParseError> {
        match self.peek() {
            Some(Tok::Neq) => {
                self.bump();
                Ok(BodyElem::Neq(lhs, self.parse_term()?))
            }
            Some(Tok::Eq) => {
                self.bump();
                Ok(BodyElem::Eq(lhs, self.parse_term()?))
            }
            _ => self.err("expected `!=` or `=`"),
        }
    }

    fn parse_body(&mut self) -> Result<Vec<BodyElem>, ParseError> {
        let mut out = vec![self.parse_body_elem()?];
        while self.peek() == Some(&Tok::Comma) {
            self.bump();
            out.push(self.parse_body_elem()?);
        }
        Ok(out)
    }

    fn opt_if_body(&mut self) -> Result<Vec<BodyElem>, ParseError> {
        if self.eat_ident("if") {
            self.parse_body()
        } else {
            Ok(Vec::new())
        }
    }

    fn end_stmt(&mut self) -> Result<(), ParseError> {
        self.expect(&Tok::Dot, "`.` at end of statement")?;
        Ok(())
    }

    // ---- sections ------------------------------------------------------

    fn at_section_header(&self) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s))
            if s == "sorts" || s == "predicates" || s == "rules" || s == "resolutions")
    }

    pub fn parse_domain(&mut self) -> Result<DomainDescription, ParseError> {
        let mut d = DomainDescription::default();
        while self.peek().is_some() {
            if self.eat_ident("sorts") {
                while self.peek().is_some() && !self.at_section_header() {
                    d.sorts.push(self.parse_sort_decl()?);
                }
            } else if self.eat_ident("predicates") {
                while self.peek().is_some() && !self.at_section_header() {
                    d.predicates.push(self.parse_pred_decl()?);
                }
            } else if self.eat_ident("rules") {
                while self.peek().is_some() && !self.at_section_header() {
                    d.rules.push(self.parse_rule()?);
                }
            } else if self.eat_ident("resolutions") {
                while self.peek().is_some() && !self.at_section_header() {
                    d.resolutions.push(self.parse_resolution_decl()?);
                }
            } else {
                return self.err("expected section header (`sorts`, `predicates`, `rules`, or `resolutions`)");
            }
        }
        Ok(d)
    }

    fn parse_sort_decl(&mut self) -> Result<SortDecl, ParseError> {
        let (name, span) = self.expect_ident("sort name")?;
        self.expect(&Tok::Eq, "`=` after sort name")?;
        let spec = match self.peek() {
            Some(Tok::LBrace) => {
                self.bump();
                let mut members = Vec::new();
                loop {
                    let (m, _) = self.expect_ident("sort member constant")?;
                    members.push(m);
                    match self.peek() {
                        Some(Tok::Comma) => {
                            self.bump();
                        }
                        Some(Tok::RBrace) => {
                            self.bump();
                            break;
                        }
                        _ => return self.err("expected `,` or `}` in member list"),
                    }
                }
                SortSpec::Members(members)
            }
            Some(Tok::Num(_)) | Some(Tok::Minus) => {
                let (lo, _) = self.expect_num("range lower bound")?;
                self.expect(&Tok::DotDot, "`..` in numeric range")?;
                let (hi, _) = self.expect_num("range upper bound")?;
                SortSpec::Range(lo, hi)
            }
            Some(Tok::Ident(_)) => {
                let mut parts = Vec::new();
                let (first, _) = self.expect_ident("sort name")?;
                parts.push(first);
                while self.peek() == Some(&Tok::Plus) {
                    self.bump();
                    let (p, _) = self.expect_ident("sort name after `+`")?;
                    parts.push(p);
                }
                if parts.len() < 2 {
                    return self.err("sort union needs at least two operands");
                }
                SortSpec::Union(parts)
            }
            _ => return self.err("expected `{members}`, numeric range, or sort union"),
        };
        self.end_stmt()?;
        Ok(SortDecl { name, spec, span })
    }

    fn parse_pred_decl(&mut self) -> Result<PredDecl, ParseError> {
        let resolution = if self.eat_ident("coarse") { Resolution::Coarse } else { Resolution::Fine };
        let kind = if self.eat_ident("static") {
            PredKind::Static
        } else if self.eat_ident("inertial") {
            PredKind::InertialFluent
        } else if self.eat_ident("defined") {
            PredKind::DefinedFluent
        } else if self.eat_ident("action") {
            PredKind::Action
        } else {
            return self.err("expected predicate kind (`static`, `inertial`, `defined`, or `action`)");
        };
        let (name, span) = self.expect_ident("predicate name")?;
        let mut arg_sorts = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.bump();
            loop {
                let (s, _) = self.expect_ident("argument sort name")?;
                arg_sorts.push(s);
                match self.peek() {
                    Some(Tok::Comma) => {
                        self.bump();
                    }
                    Some(Tok::RParen) => {
                        self.bump();
                        break;
                    }
                    _ => return self.err("expected `,` or `)` in sort list"),
                }
            }
        }
        self.end_stmt()?;
        Ok(PredDecl { name, kind, resolution, arg_sorts, span })
    }

    fn parse_rule(&mut self) -> Result<Rule, ParseError> {
        if self.eat_ident("impossible") {
            let action = self.parse_atom()?;
            let body = self.opt_if_body()?;
            self.end_stmt()?;
            return Ok(Rule::Executability { action, body });
        }
        if self.at_ident("initial") {
            self.bump();
            if !self.eat_ident("default") {
                return self.err("expected `default` after `initial`");
            }
            let head = self.parse_literal()?;
            let body = self.opt_if_body()?;
            self.end_stmt()?;
            return Ok(Rule::InitialDefault { head, body });
        }
        if self.peek() == Some(&Tok::CrRule) {
            self.bump();
            let head = self.parse_literal()?;
            let body = self.opt_if_body()?;
            self.end_stmt()?;
            return Ok(Rule::CrRule { head, body });
        }
        if self.eat_ident("cost") {
            let action = self.parse_atom()?;
            self.expect(&Tok::Eq, "`=` in cost declaration")?;
            let (n, nspan) = self.expect_num("cost value")?;
            if n < 0 {
                return Err(ParseError { span: nspan, message: "cost must be non-negative".into() });
            }
            let cost = u32::try_from(n)
                .map_err(|_| ParseError { span: nspan, message: "cost too large".into() })?;
            self.end_stmt()?;
            return Ok(Rule::CostDecl { action, cost });
        }
        if self.eat_ident("goal") {
            let mut targets = vec![self.parse_literal()?];
            while self.peek() == Some(&Tok::Comma) {
                self.bump();
                targets.push(self.parse_literal()?);
            }
            let when = self.opt_if_body()?;
            self.end_stmt()?;
            return Ok(Rule::GoalDecl { targets, when });
        }

        // Everything else opens with a literal.
        let lead = self.parse_literal()?;
        if self.at_ident("causes") {
            if lead.sign == Sign::Neg {
                return Err(ParseError {
                    span: lead.atom.span,
                    message: "action atom before `causes` cannot be negated".into(),
                });
            }
            self.bump();
            let head = self.parse_literal()?;
            let body = self.opt_if_body()?;
            self.end_stmt()?;
            return Ok(Rule::CausalLaw { action: lead.atom, head, body });
        }
        if self.at_ident("if") {
            self.bump();
            let body = self.parse_body()?;
            self.end_stmt()?;
            return Ok(Rule::StateConstraint { head: lead, body });
        }
        self.end_stmt()?;
        if lead.sign == Sign::Pos && lead.atom.is_ground() {
            Ok(Rule::Fact { atom: lead.atom })
        } else {
            Ok(Rule::StateConstraint { head: lead, body: Vec::new() })
        }
    }

    fn parse_resolution_decl(&mut self) -> Result<ResolutionDecl, ParseError> {
        if self.eat_ident("region") {
            let (name, span) = self.expect_ident("region name")?;
            self.expect(&Tok::Eq, "`=` in region declaration")?;
            self.expect(&Tok::LParen, "`(`")?;
            let (x0, _) = self.expect_num("x range lower bound")?;
            self.expect(&Tok::DotDot, "`..`")?;
            let (x1, _) = self.expect_num("x range upper bound")?;
            self.expect(&Tok::Comma, "`,`")?;
            let (y0, _) = self.expect_num("y range lower bound")?;
            self.expect(&Tok::DotDot, "`..`")?;
            let (y1, _) = self.expect_num("y range upper bound")?;
            self.expect(&Tok::RParen, "`)`")?;
            self.end_stmt()?;
            return Ok(ResolutionDecl::RegionRect { name, x: (x0, x1), y: (y0, y1), span });
        }
        if self.at_ident("component") {
            let (_, span) = self.expect_ident("component")?;
            self.expect(&Tok::LParen, "`(`")?;
            let (x, _) = self.expect_num("x value")?;
            self.expect(&Tok::Comma, "`,`")?;
            let (y, _) = self.expect_num("y value")?;
            self.expect(&Tok::Comma, "`,`")?;
            let (region, _) = self.expect_ident("region name")?;
            self.expect(&Tok::RParen, "`)`")?;
            self.end_stmt()?;
            return Ok(ResolutionDecl::Component { x, y, region, span });
        }
        self.err("expected `region` or `component` declaration")
    }

    // ---- histories -----------------------------------------------------

    pub fn parse_history(&mut self) -> Result<Vec<HistoryEntry>, ParseError> {
        let mut out = Vec::new();
        while self.peek().is_some() {
            if self.eat_ident("obs") {
                self.expect(&Tok::LParen, "`(`")?;
                let atom = self.parse_atom()?;
                self.expect(&Tok::Comma, "`,`")?;
                let value = if self.eat_ident("true") {
                    true
                } else if self.eat_ident("false") {
                    false
                } else {
                    return self.err("expected `true` or `false`");
                };
                self.expect(&Tok::Comma, "`,`")?;
                let (step, sspan) = self.expect_num("step index")?;
                if step < 0 {
                    return Err(ParseError { span: sspan, message: "step must be non-negative".into() });
                }
                self.expect(&Tok::RParen, "`)`")?;
                self.end_stmt()?;
                out.push(HistoryEntry::Obs { atom, value, step: step as u32 });
            } else if self.eat_ident("hpd") {
                self.expect(&Tok::LParen, "`(`")?;
                let atom = self.parse_atom()?;
                self.expect(&Tok::Comma, "`,`")?;
                let (step, sspan) = self.expect_num("step index")?;
                if step < 0 {
                    return Err(ParseError { span: sspan, message: "step must be non-negative".into() });
                }
                self.expect(&Tok::RParen, "`)`")?;
                self.end_stmt()?;
                out.push(HistoryEntry::Hpd { atom, step: step as u32 });
            } else {
                return self.err("expected `obs(...)` or `hpd(...)` record");
            }
        }
        // Stable order by step; records at equal steps keep document order.
        out.sort_by_key(|e| e.step());
        Ok(out)
    }
}
