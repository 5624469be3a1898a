//! Signature and rule-kind validation.
//!
//! Successful validation returns a copy of the description with
//! coarse-over-fine constraints reclassified as bridge axioms.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::parser::RESERVED;
use super::ParseError;

fn err<T>(span: Span, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { span, message: message.into() })
}

pub struct SortTable {
    /// Expanded member sets per sort.
    pub members: BTreeMap<String, BTreeSet<Term>>,
}

impl SortTable {
    pub fn contains(&self, sort: &str, t: &Term) -> bool {
        self.members.get(sort).map(|m| m.contains(t)).unwrap_or(false)
    }
}

pub fn build_sort_table(d: &DomainDescription) -> Result<SortTable, ParseError> {
    let mut seen: BTreeMap<&str, &SortDecl> = BTreeMap::new();
    for s in &d.sorts {
        if RESERVED.contains(&s.name.as_str()) {
            return err(s.span, format!("`{}` is reserved and cannot name a sort", s.name));
        }
        if seen.insert(s.name.as_str(), s).is_some() {
            return err(s.span, format!("sort `{}` declared twice", s.name));
        }
    }
    // Union references must exist and the subsort graph must be acyclic.
    for s in &d.sorts {
        if let SortSpec::Union(parts) = &s.spec {
            for p in parts {
                if !seen.contains_key(p.as_str()) {
                    return err(s.span, format!("undeclared sort `{p}` in union `{}`", s.name));
                }
            }
        }
        if let SortSpec::Range(lo, hi) = s.spec {
            if lo > hi {
                return err(s.span, format!("empty range {lo}..{hi} for sort `{}`", s.name));
            }
        }
        if let SortSpec::Members(ms) = &s.spec {
            let mut set = BTreeSet::new();
            for m in ms {
                if !set.insert(m) {
                    return err(s.span, format!("duplicate member `{m}` in sort `{}`", s.name));
                }
            }
        }
    }
    // DFS for cycles through union edges.
    fn visit(
        name: &str,
        seen: &BTreeMap<&str, &SortDecl>,
        state: &mut BTreeMap<String, u8>,
    ) -> Result<(), ParseError> {
        match state.get(name) {
            Some(1) => {
                let span = seen.get(name).map(|s| s.span).unwrap_or_default();
                return err(span, format!("cyclic sort graph through `{name}`"));
            }
            Some(2) => return Ok(()),
            _ => {}
        }
        state.insert(name.to_string(), 1);
        if let Some(decl) = seen.get(name) {
            if let SortSpec::Union(parts) = &decl.spec {
                for p in parts {
                    visit(p, seen, state)?;
                }
            }
        }
        state.insert(name.to_string(), 2);
        Ok(())
    }
    let mut state = BTreeMap::new();
    for s in &d.sorts {
        visit(&s.name, &seen, &mut state)?;
    }

    let mut members = BTreeMap::new();
    for s in &d.sorts {
        let ms: BTreeSet<Term> = d.sort_members(&s.name).into_iter().collect();
        if ms.is_empty() {
            return err(s.span, format!("sort `{}` has no members", s.name));
        }
        members.insert(s.name.clone(), ms);
    }
    Ok(SortTable { members })
}

struct Ctx<'a> {
    d: &'a DomainDescription,
    sorts: &'a SortTable,
}

impl<'a> Ctx<'a> {
    fn pred(&self, atom: &Atom) -> Result<&'a PredDecl, ParseError> {
        match self.d.pred(&atom.pred) {
            Some(p) => {
                if p.arg_sorts.len() != atom.args.len() {
                    return err(
                        atom.span,
                        format!(
                            "arity mismatch: `{}` declared with {} argument(s), used with {}",
                            atom.pred,
                            p.arg_sorts.len(),
                            atom.args.len()
                        ),
                    );
                }
                Ok(p)
            }
            None => err(atom.span, format!("undeclared predicate `{}`", atom.pred)),
        }
    }

    fn is_sort_atom(&self, atom: &Atom) -> bool {
        atom.args.len() == 1 && self.d.pred(&atom.pred).is_none() && self.d.sort(&atom.pred).is_some()
    }

    /// Check one atom; returns its per-position sorts, recording variable
    /// sort constraints into `vars`.
    fn check_atom(
        &self,
        atom: &Atom,
        vars: &mut BTreeMap<String, Vec<String>>,
    ) -> Result<(), ParseError> {
        let arg_sorts: Vec<String> = if self.is_sort_atom(atom) {
            vec![atom.pred.clone()]
        } else {
            self.pred(atom)?.arg_sorts.clone()
        };
        for (t, sort) in atom.args.iter().zip(arg_sorts.iter()) {
            match t {
                Term::Var(v) => vars.entry(v.clone()).or_default().push(sort.clone()),
                ground => {
                    if !self.sorts.contains(sort, ground) {
                        return err(
                            atom.span,
                            format!("argument `{ground}` of `{}` is not a member of sort `{sort}`", atom.pred),
                        );
                    }
                }
            }
        }
        Ok(())
    }

    /// The variable-sort intersections for a whole rule must be non-empty.
    fn check_var_sorts(&self, span: Span, vars: &BTreeMap<String, Vec<String>>) -> Result<(), ParseError> {
        for (v, sorts) in vars {
            let mut iter = sorts.iter();
            let first = iter.next().expect("non-empty");
            let mut inter: BTreeSet<Term> = self
                .sorts
                .members
                .get(first)
                .cloned()
                .ok_or_else(|| ParseError { span, message: format!("undeclared sort `{first}`") })?;
            for s in iter {
                let other = self
                    .sorts
                    .members
                    .get(s)
                    .ok_or_else(|| ParseError { span, message: format!("undeclared sort `{s}`") })?;
                inter = inter.intersection(other).cloned().collect();
            }
            if inter.is_empty() {
                return err(span, format!("variable `{v}` has no possible values (empty sort intersection)"));
            }
        }
        Ok(())
    }

    fn check_body(
        &self,
        span: Span,
        body: &[BodyElem],
        vars: &mut BTreeMap<String, Vec<String>>,
        allow_kinds: &dyn Fn(PredKind) -> bool,
        what: &str,
    ) -> Result<(), ParseError> {
        for e in body {
            match e {
                BodyElem::Lit { lit, .. } => {
                    if self.is_sort_atom(&lit.atom) {
                        if lit.sign == Sign::Neg {
                            return err(lit.atom.span, "sort-membership atoms cannot be classically negated");
                        }
                        self.check_atom(&lit.atom, vars)?;
                        continue;
                    }
                    let p = self.pred(&lit.atom)?;
                    if !allow_kinds(p.kind) {
                        return err(
                            lit.atom.span,
                            format!("`{}` ({}) not allowed in {what} body", lit.atom.pred, p.kind.keyword()),
                        );
                    }
                    self.check_atom(&lit.atom, vars)?;
                }
                BodyElem::Neq(a, b) | BodyElem::Eq(a, b) => {
                    for t in [a, b] {
                        if let Term::Var(v) = t {
                            if !vars.contains_key(v) {
                                // Defer: the variable may be bound later in the
                                // body; re-checked after the full pass.
                                vars.entry(v.clone()).or_default();
                            }
                        }
                    }
                }
            }
        }
        // Comparison-only variables never pick up a sort.
        for (v, sorts) in vars.iter() {
            if sorts.is_empty() {
                return err(span, format!("variable `{v}` occurs only in comparisons and is unbound"));
            }
        }
        Ok(())
    }

    fn body_resolutions(&self, body: &[BodyElem]) -> BTreeSet<Resolution> {
        let mut out = BTreeSet::new();
        for e in body {
            if let BodyElem::Lit { lit, .. } = e {
                if let Some(p) = self.d.pred(&lit.atom.pred) {
                    if p.kind != PredKind::Static {
                        out.insert(p.resolution);
                    }
                }
            }
        }
        out
    }
}

pub fn validate(parsed: DomainDescription) -> Result<DomainDescription, ParseError> {
    let sorts = build_sort_table(&parsed)?;

    // Predicate declarations.
    let mut pred_names = BTreeSet::new();
    for p in &parsed.predicates {
        if RESERVED.contains(&p.name.as_str()) {
            return err(p.span, format!("`{}` is reserved and cannot name a predicate", p.name));
        }
        if parsed.sort(&p.name).is_some() {
            return err(p.span, format!("`{}` already names a sort", p.name));
        }
        if !pred_names.insert(p.name.clone()) {
            return err(p.span, format!("predicate `{}` declared twice", p.name));
        }
        for s in &p.arg_sorts {
            if parsed.sort(s).is_none() {
                return err(p.span, format!("undeclared sort `{s}` in declaration of `{}`", p.name));
            }
        }
    }

    let ctx = Ctx { d: &parsed, sorts: &sorts };
    let fluents_and_statics =
        |k: PredKind| matches!(k, PredKind::Static | PredKind::InertialFluent | PredKind::DefinedFluent);
    let statics_only = |k: PredKind| k == PredKind::Static;

    let mut out_rules = Vec::with_capacity(parsed.rules.len());
    let mut defaults: Vec<&Literal> = Vec::new();
    for r in &parsed.rules {
        if let Rule::InitialDefault { head, .. } = r {
            defaults.push(head);
        }
    }
    let mut cost_preds: BTreeSet<String> = BTreeSet::new();

    for r in &parsed.rules {
        let mut vars: BTreeMap<String, Vec<String>> = BTreeMap::new();
        match r {
            Rule::CausalLaw { action, head, body } => {
                let ap = ctx.pred(action)?;
                if ap.kind != PredKind::Action {
                    return err(action.span, format!("`{}` before `causes` must be an action", action.pred));
                }
                let hp = ctx.pred(&head.atom)?;
                if hp.kind != PredKind::InertialFluent {
                    return err(
                        head.atom.span,
                        format!("causal law head `{}` must be an inertial fluent", head.atom.pred),
                    );
                }
                if hp.resolution != ap.resolution {
                    return err(head.atom.span, "causal law mixes resolutions");
                }
                ctx.check_atom(action, &mut vars)?;
                ctx.check_atom(&head.atom, &mut vars)?;
                ctx.check_body(action.span, body, &mut vars, &fluents_and_statics, "causal law")?;
                if ctx.body_resolutions(body).contains(&opposite(ap.resolution)) {
                    return err(action.span, "causal law mixes resolutions");
                }
                ctx.check_var_sorts(action.span, &vars)?;
                out_rules.push(r.clone());
            }
            Rule::StateConstraint { head, body } => {
                let hp = ctx.pred(&head.atom)?;
                if !hp.kind.is_fluent() {
                    return err(
                        head.atom.span,
                        format!("constraint head `{}` must be a fluent (statics get facts)", head.atom.pred),
                    );
                }
                ctx.check_atom(&head.atom, &mut vars)?;
                ctx.check_body(head.atom.span, body, &mut vars, &fluents_and_statics, "constraint")?;
                ctx.check_var_sorts(head.atom.span, &vars)?;
                let body_res = ctx.body_resolutions(body);
                if hp.resolution == Resolution::Coarse && body_res.contains(&Resolution::Fine) {
                    // A bridge axiom: coarse head seeded from the fine description.
                    if hp.kind != PredKind::InertialFluent || head.sign != Sign::Pos {
                        return err(
                            head.atom.span,
                            "bridge axiom head must be a positive coarse inertial fluent",
                        );
                    }
                    out_rules.push(Rule::BridgeAxiom { head: head.clone(), body: body.clone() });
                    continue;
                }
                if hp.resolution == Resolution::Fine && body_res.contains(&Resolution::Coarse) {
                    return err(head.atom.span, "fine-resolution head cannot depend on coarse fluents");
                }
                if hp.kind == PredKind::DefinedFluent && head.sign != Sign::Pos {
                    return err(head.atom.span, "defined fluents are derived positively (closed world)");
                }
                out_rules.push(r.clone());
            }
            Rule::BridgeAxiom { .. } => unreachable!("parser never produces bridge axioms"),
            Rule::Executability { action, body } => {
                let ap = ctx.pred(action)?;
                if ap.kind != PredKind::Action {
                    return err(action.span, format!("`{}` after `impossible` must be an action", action.pred));
                }
                ctx.check_atom(action, &mut vars)?;
                ctx.check_body(action.span, body, &mut vars, &fluents_and_statics, "executability condition")?;
                if ctx.body_resolutions(body).contains(&opposite(ap.resolution)) {
                    return err(action.span, "executability condition mixes resolutions");
                }
                ctx.check_var_sorts(action.span, &vars)?;
                out_rules.push(r.clone());
            }
            Rule::InitialDefault { head, body } => {
                let hp = ctx.pred(&head.atom)?;
                if hp.kind != PredKind::InertialFluent {
                    return err(head.atom.span, "default head must be an inertial fluent");
                }
                ctx.check_atom(&head.atom, &mut vars)?;
                ctx.check_body(head.atom.span, body, &mut vars, &statics_only, "default")?;
                ctx.check_var_sorts(head.atom.span, &vars)?;
                out_rules.push(r.clone());
            }
            Rule::CrRule { head, body } => {
                let hp = ctx.pred(&head.atom)?;
                if hp.kind != PredKind::InertialFluent {
                    return err(head.atom.span, "cr-rule head must be an inertial fluent");
                }
                let matching = defaults
                    .iter()
                    .filter(|dh| {
                        dh.atom.pred == head.atom.pred
                            && dh.atom.args.len() == head.atom.args.len()
                            && dh.sign != head.sign
                    })
                    .count();
                if matching != 1 {
                    return err(
                        head.atom.span,
                        format!(
                            "cr-rule head must negate exactly one default's head ({matching} match)",
                        ),
                    );
                }
                ctx.check_atom(&head.atom, &mut vars)?;
                ctx.check_body(head.atom.span, body, &mut vars, &statics_only, "cr-rule")?;
                ctx.check_var_sorts(head.atom.span, &vars)?;
                out_rules.push(r.clone());
            }
            Rule::CostDecl { action, cost } => {
                let ap = ctx.pred(action)?;
                if ap.kind != PredKind::Action {
                    return err(action.span, format!("cost declaration needs an action, got `{}`", action.pred));
                }
                if !cost_preds.insert(action.pred.clone()) {
                    return err(action.span, format!("duplicate cost declaration for `{}`", action.pred));
                }
                let mut seen_vars = BTreeSet::new();
                for t in &action.args {
                    match t {
                        Term::Var(v) => {
                            if !seen_vars.insert(v.clone()) {
                                return err(action.span, "cost declaration arguments must be distinct variables");
                            }
                        }
                        _ => return err(action.span, "cost declaration arguments must be distinct variables"),
                    }
                }
                ctx.check_atom(action, &mut vars)?;
                ctx.check_var_sorts(action.span, &vars)?;
                let _ = cost;
                out_rules.push(r.clone());
            }
            Rule::GoalDecl { targets, when } => {
                let mut res: Option<Resolution> = None;
                for t in targets {
                    let tp = ctx.pred(&t.atom)?;
                    if !tp.kind.is_fluent() {
                        return err(t.atom.span, "goal targets must be fluent literals");
                    }
                    if *res.get_or_insert(tp.resolution) != tp.resolution {
                        return err(t.atom.span, "goal declaration mixes resolutions");
                    }
                    ctx.check_atom(&t.atom, &mut vars)?;
                }
                ctx.check_body(r.span(), when, &mut vars, &fluents_and_statics, "goal condition")?;
                if let Some(r0) = res {
                    if ctx.body_resolutions(when).contains(&opposite(r0)) {
                        return err(r.span(), "goal declaration mixes resolutions");
                    }
                }
                ctx.check_var_sorts(r.span(), &vars)?;
                out_rules.push(r.clone());
            }
            Rule::Fact { atom } => {
                let p = ctx.pred(atom)?;
                if p.kind != PredKind::Static {
                    return err(atom.span, format!("facts must be statics, `{}` is {}", atom.pred, p.kind.keyword()));
                }
                ctx.check_atom(atom, &mut vars)?;
                out_rules.push(r.clone());
            }
        }
    }

    // Defined-fluent dependency graph must be acyclic so that the closure is
    // a single stratified pass.
    let mut def_deps: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for r in &out_rules {
        if let Rule::StateConstraint { head, body } = r {
            let hp = parsed.pred(&head.atom.pred).expect("checked");
            if hp.kind != PredKind::DefinedFluent {
                continue;
            }
            let entry = def_deps.entry(head.atom.pred.as_str()).or_default();
            for e in body {
                if let BodyElem::Lit { lit, .. } = e {
                    if let Some(bp) = parsed.pred(&lit.atom.pred) {
                        if bp.kind == PredKind::DefinedFluent {
                            entry.insert(lit.atom.pred.as_str());
                        }
                    }
                }
            }
        }
    }
    {
        let mut state: BTreeMap<&str, u8> = BTreeMap::new();
        fn visit<'x>(
            n: &'x str,
            deps: &BTreeMap<&'x str, BTreeSet<&'x str>>,
            state: &mut BTreeMap<&'x str, u8>,
        ) -> bool {
            match state.get(n) {
                Some(1) => return false,
                Some(2) => return true,
                _ => {}
            }
            state.insert(n, 1);
            if let Some(ds) = deps.get(n) {
                for d in ds {
                    if !visit(d, deps, state) {
                        return false;
                    }
                }
            }
            state.insert(n, 2);
            true
        }
        let keys: Vec<&str> = def_deps.keys().copied().collect();
        for k in keys {
            if !visit(k, &def_deps, &mut state) {
                let span = parsed.pred(k).map(|p| p.span).unwrap_or_default();
                return err(span, format!("defined fluents are not stratified: cycle through `{k}`"));
            }
        }
    }

    // Resolutions: component entries must partition the fine cell space.
    if !parsed.resolutions.is_empty() {
        let comp = parsed
            .pred("component")
            .ok_or_else(|| ParseError {
                span: parsed.resolutions[0].span_of(),
                message: "resolutions require a declared static `component(x, y, region)`".into(),
            })?
            .clone();
        if comp.arg_sorts.len() != 3 || comp.kind != PredKind::Static {
            return err(comp.span, "`component` must be a 3-ary static");
        }
        let xs = sorts.members.get(&comp.arg_sorts[0]).cloned().unwrap_or_default();
        let ys = sorts.members.get(&comp.arg_sorts[1]).cloned().unwrap_or_default();
        let mut assigned: BTreeMap<(i64, i64), String> = BTreeMap::new();
        for rd in &parsed.resolutions {
            let entries: Vec<(i64, i64, &String, Span)> = match rd {
                ResolutionDecl::RegionRect { name, x, y, span } => {
                    let mut v = Vec::new();
                    for cx in x.0..=x.1 {
                        for cy in y.0..=y.1 {
                            v.push((cx, cy, name, *span));
                        }
                    }
                    v
                }
                ResolutionDecl::Component { x, y, region, span } => vec![(*x, *y, region, *span)],
            };
            for (cx, cy, rg, span) in entries {
                if !sorts.contains(&comp.arg_sorts[2], &Term::Const(rg.clone())) {
                    return err(span, format!("`{rg}` is not a member of sort `{}`", comp.arg_sorts[2]));
                }
                if !xs.contains(&Term::Num(cx)) || !ys.contains(&Term::Num(cy)) {
                    return err(span, format!("cell ({cx}, {cy}) outside the declared fine sorts"));
                }
                if let Some(prev) = assigned.insert((cx, cy), rg.clone()) {
                    if prev != *rg {
                        return err(span, format!("cell ({cx}, {cy}) assigned to both `{prev}` and `{rg}`"));
                    }
                    return err(span, format!("cell ({cx}, {cy}) assigned twice"));
                }
            }
        }
        for x in &xs {
            for y in &ys {
                if let (Term::Num(cx), Term::Num(cy)) = (x, y) {
                    if !assigned.contains_key(&(*cx, *cy)) {
                        return err(
                            parsed.resolutions[0].span_of(),
                            format!("cell ({cx}, {cy}) not assigned to any region"),
                        );
                    }
                }
            }
        }
    }

    Ok(DomainDescription {
        sorts: parsed.sorts,
        predicates: parsed.predicates,
        rules: out_rules,
        resolutions: parsed.resolutions,
    })
}

fn opposite(r: Resolution) -> Resolution {
    match r {
        Resolution::Fine => Resolution::Coarse,
        Resolution::Coarse => Resolution::Fine,
    }
}

impl ResolutionDecl {
    pub fn span_of(&self) -> Span {
        match self {
            ResolutionDecl::RegionRect { span, .. } | ResolutionDecl::Component { span, .. } => *span,
        }
    }
}

/// Validate a parsed history against a domain description.
pub fn validate_history(entries: &[HistoryEntry], d: &DomainDescription) -> Result<(), ParseError> {
    let sorts = build_sort_table(d)?;
    let ctx = Ctx { d, sorts: &sorts };
    for e in entries {
        match e {
            HistoryEntry::Obs { atom, .. } => {
                let p = ctx.pred(atom)?;
                if p.kind != PredKind::InertialFluent {
                    return err(atom.span, format!("observations must be inertial fluents, `{}` is {}", atom.pred, p.kind.keyword()));
                }
                if !atom.is_ground() {
                    return err(atom.span, "observations must be ground");
                }
                let mut vars = BTreeMap::new();
                ctx.check_atom(atom, &mut vars)?;
            }
            HistoryEntry::Hpd { atom, .. } => {
                let p = ctx.pred(atom)?;
                if p.kind != PredKind::Action {
                    return err(atom.span, format!("hpd records must be actions, `{}` is {}", atom.pred, p.kind.keyword()));
                }
                if !atom.is_ground() {
                    return err(atom.span, "hpd records must be ground");
                }
                let mut vars = BTreeMap::new();
                ctx.check_atom(atom, &mut vars)?;
            }
        }
    }
    Ok(())
}
