//! Syntax tree for the rule-language dialect.
//!
//! Structural equality deliberately ignores source positions so that the
//! parse → print → parse round-trip law can be written as plain `==`.

use std::fmt;

/// Source position of a token (1-based line and column).
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
    /// Length in characters of the offending token.
    pub len: u32,
}

impl Span {
    pub fn new(line: u32, col: u32, len: u32) -> Self {
        Span { line, col, len }
    }
}

// Spans never participate in equality or hashing.
impl PartialEq for Span {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}
impl Eq for Span {}
impl std::hash::Hash for Span {
    fn hash<H: std::hash::Hasher>(&self, _state: &mut H) {}
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A term: lowercase constant, integer, or capitalized variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Const(String),
    Num(i64),
    Var(String),
}

impl Term {
    pub fn is_ground(&self) -> bool {
        !matches!(self, Term::Var(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => write!(f, "{c}"),
            Term::Num(n) => write!(f, "{n}"),
            Term::Var(v) => write!(f, "{v}"),
        }
    }
}

/// Predicate application, e.g. `loc(aha, 3, 2)` or a 0-ary `frontal_threat*`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
    pub span: Span,
}

impl Atom {
    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() {
            return write!(f, "{}", self.pred);
        }
        write!(f, "{}(", self.pred)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Pos,
    Neg,
}

/// Signed atom; `-` is classical negation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub sign: Sign,
    pub atom: Atom,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal { sign: Sign::Pos, atom }
    }
    pub fn neg(atom: Atom) -> Self {
        Literal { sign: Sign::Neg, atom }
    }
    pub fn negated(&self) -> Self {
        Literal {
            sign: match self.sign {
                Sign::Pos => Sign::Neg,
                Sign::Neg => Sign::Pos,
            },
            atom: self.atom.clone(),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign == Sign::Neg {
            write!(f, "-")?;
        }
        write!(f, "{}", self.atom)
    }
}

/// One element of a rule body: an extended literal or a built-in comparison.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BodyElem {
    /// `lit` or `not lit`; `default_neg` marks the `not`.
    Lit { default_neg: bool, lit: Literal },
    /// `X != Y`
    Neq(Term, Term),
    /// `X = Y`
    Eq(Term, Term),
}

impl fmt::Display for BodyElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyElem::Lit { default_neg, lit } => {
                if *default_neg {
                    write!(f, "not ")?;
                }
                write!(f, "{lit}")
            }
            BodyElem::Neq(a, b) => write!(f, "{a} != {b}"),
            BodyElem::Eq(a, b) => write!(f, "{a} = {b}"),
        }
    }
}

/// How a sort's members are given.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SortSpec {
    /// `{c1, c2, c3}`
    Members(Vec<String>),
    /// `lo..hi`, inclusive.
    Range(i64, i64),
    /// `s1 + s2 (+ ...)`: this sort is the union of the named sorts, which
    /// become its subsorts.
    Union(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortDecl {
    pub name: String,
    pub spec: SortSpec,
    pub span: Span,
}

/// Predicate kinds of the sorted signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PredKind {
    Static,
    InertialFluent,
    DefinedFluent,
    Action,
}

impl PredKind {
    pub fn keyword(self) -> &'static str {
        match self {
            PredKind::Static => "static",
            PredKind::InertialFluent => "inertial",
            PredKind::DefinedFluent => "defined",
            PredKind::Action => "action",
        }
    }
    pub fn is_fluent(self) -> bool {
        matches!(self, PredKind::InertialFluent | PredKind::DefinedFluent)
    }
}

/// Which of the two coupled descriptions a predicate belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Resolution {
    Fine,
    Coarse,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredDecl {
    pub name: String,
    pub kind: PredKind,
    pub resolution: Resolution,
    pub arg_sorts: Vec<String>,
    pub span: Span,
}

/// Statement kinds of the `rules` section.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    /// `action causes head if body.`
    CausalLaw { action: Atom, head: Literal, body: Vec<BodyElem> },
    /// `head if body.` with a fluent head (defining rule for defined
    /// fluents, integrity constraint for inertial heads).
    StateConstraint { head: Literal, body: Vec<BodyElem> },
    /// `head if body.` with a coarse fluent head over a fine body;
    /// classified during validation.
    BridgeAxiom { head: Literal, body: Vec<BodyElem> },
    /// `impossible action if body.`
    Executability { action: Atom, body: Vec<BodyElem> },
    /// `initial default head if body.`
    InitialDefault { head: Literal, body: Vec<BodyElem> },
    /// `cr-rule head if body.`; the head must negate exactly one default's head.
    CrRule { head: Literal, body: Vec<BodyElem> },
    /// `cost action = n.`
    CostDecl { action: Atom, cost: u32 },
    /// `goal l1, l2 if body.`; priority is declaration order.
    GoalDecl { targets: Vec<Literal>, when: Vec<BodyElem> },
    /// Bare ground static atom.
    Fact { atom: Atom },
}

impl Rule {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Rule::CausalLaw { .. } => "causal-law",
            Rule::StateConstraint { .. } => "state-constraint",
            Rule::BridgeAxiom { .. } => "bridge-axiom",
            Rule::Executability { .. } => "executability",
            Rule::InitialDefault { .. } => "initial-default",
            Rule::CrRule { .. } => "cr-rule",
            Rule::CostDecl { .. } => "cost-decl",
            Rule::GoalDecl { .. } => "goal-decl",
            Rule::Fact { .. } => "fact",
        }
    }

    pub fn span(&self) -> Span {
        match self {
            Rule::CausalLaw { action, .. } => action.span,
            Rule::StateConstraint { head, .. } => head.atom.span,
            Rule::BridgeAxiom { head, .. } => head.atom.span,
            Rule::Executability { action, .. } => action.span,
            Rule::InitialDefault { head, .. } => head.atom.span,
            Rule::CrRule { head, .. } => head.atom.span,
            Rule::CostDecl { action, .. } => action.span,
            Rule::GoalDecl { targets, .. } => targets.first().map(|l| l.atom.span).unwrap_or_default(),
            Rule::Fact { atom } => atom.span,
        }
    }
}

/// Entries of the `resolutions` section.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResolutionDecl {
    /// `region name = (x0..x1, y0..y1).` - every cell of the rectangle is a
    /// component of the region.
    RegionRect { name: String, x: (i64, i64), y: (i64, i64), span: Span },
    /// `component(x, y, region).`
    Component { x: i64, y: i64, region: String, span: Span },
}

/// A parsed and validated domain description.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DomainDescription {
    pub sorts: Vec<SortDecl>,
    pub predicates: Vec<PredDecl>,
    pub rules: Vec<Rule>,
    pub resolutions: Vec<ResolutionDecl>,
}

impl DomainDescription {
    pub fn pred(&self, name: &str) -> Option<&PredDecl> {
        self.predicates.iter().find(|p| p.name == name)
    }
    pub fn sort(&self, name: &str) -> Option<&SortDecl> {
        self.sorts.iter().find(|s| s.name == name)
    }
    /// Expanded member list of a sort, in declaration order.
    pub fn sort_members(&self, name: &str) -> Vec<Term> {
        let Some(decl) = self.sort(name) else { return Vec::new() };
        match &decl.spec {
            SortSpec::Members(cs) => cs.iter().map(|c| Term::Const(c.clone())).collect(),
            SortSpec::Range(lo, hi) => (*lo..=*hi).map(Term::Num).collect(),
            SortSpec::Union(parts) => {
                let mut out = Vec::new();
                for p in parts {
                    for m in self.sort_members(p) {
                        if !out.contains(&m) {
                            out.push(m);
                        }
                    }
                }
                out
            }
        }
    }
    /// Goal declarations in priority order (earlier declaration = higher priority).
    pub fn goal_decls(&self) -> Vec<(&Vec<Literal>, &Vec<BodyElem>)> {
        self.rules
            .iter()
            .filter_map(|r| match r {
                Rule::GoalDecl { targets, when } => Some((targets, when)),
                _ => None,
            })
            .collect()
    }
}

/// One record of a history document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HistoryEntry {
    /// `obs(fluent, boolean, step).`
    Obs { atom: Atom, value: bool, step: u32 },
    /// `hpd(action, step).`
    Hpd { atom: Atom, step: u32 },
}

impl HistoryEntry {
    pub fn step(&self) -> u32 {
        match self {
            HistoryEntry::Obs { step, .. } | HistoryEntry::Hpd { step, .. } => *step,
        }
    }
}

impl fmt::Display for HistoryEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HistoryEntry::Obs { atom, value, step } => write!(f, "obs({atom}, {value}, {step})."),
            HistoryEntry::Hpd { atom, step } => write!(f, "hpd({atom}, {step})."),
        }
    }
}
