//! Exhaustive grounding of a domain description over its finite sorts.
//!
//! Fluent and action atoms are interned into dense ids; statics are
//! resolved against the fact set at grounding time, so ground rule bodies
//! only carry fluent conditions. Instances whose static/built-in
//! conditions are false are dropped but still counted in the statistics.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::rulelang::{
    build_sort_table, Atom, BodyElem, DomainDescription, Literal, PredKind, Resolution,
    ResolutionDecl, Rule, Sign, SortTable, Term,
};

use super::ReasonError;

pub const DEFAULT_GROUND_CEILING: u64 = 5_000_000;

/// Dense id of an interned fluent or action atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotCat {
    Inertial,
    Defined,
    Action,
}

/// Where an atom lives: resolution, category, and dense per-category index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotRef {
    pub res: Resolution,
    pub cat: SlotCat,
    pub idx: u32,
}

#[derive(Debug, Clone)]
struct StoredAtom {
    pred: u32,
    args: Vec<Term>,
    slot: SlotRef,
}

#[derive(Debug, Clone)]
pub struct PredInfo {
    pub name: String,
    pub kind: PredKind,
    pub resolution: Resolution,
    pub arg_sorts: Vec<String>,
}

/// Interned universe of ground fluent and action atoms.
#[derive(Debug)]
pub struct AtomTable {
    preds: Vec<PredInfo>,
    pred_idx: BTreeMap<String, u32>,
    atoms: Vec<StoredAtom>,
    index: HashMap<(u32, Vec<Term>), AtomId>,
    by_slot: BTreeMap<(Resolution, u8, u32), AtomId>,
}

impl AtomTable {
    pub fn pred_info(&self, id: AtomId) -> &PredInfo {
        &self.preds[self.atoms[id.0 as usize].pred as usize]
    }
    pub fn slot(&self, id: AtomId) -> SlotRef {
        self.atoms[id.0 as usize].slot
    }
    pub fn lookup(&self, pred: &str, args: &[Term]) -> Option<AtomId> {
        let p = *self.pred_idx.get(pred)?;
        self.index.get(&(p, args.to_vec())).copied()
    }
    pub fn atom_by_slot(&self, res: Resolution, cat: SlotCat, idx: u32) -> AtomId {
        self.by_slot[&(res, cat as u8, idx)]
    }
    pub fn args(&self, id: AtomId) -> &[Term] {
        &self.atoms[id.0 as usize].args
    }
    pub fn display(&self, id: AtomId) -> String {
        let a = &self.atoms[id.0 as usize];
        let name = &self.preds[a.pred as usize].name;
        if a.args.is_empty() {
            name.clone()
        } else {
            let args: Vec<String> = a.args.iter().map(|t| t.to_string()).collect();
            format!("{}({})", name, args.join(", "))
        }
    }
    pub fn len(&self) -> usize {
        self.atoms.len()
    }
    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
    pub fn pred_arg_sorts(&self, pred: &str) -> Option<&[String]> {
        let p = *self.pred_idx.get(pred)?;
        Some(&self.preds[p as usize].arg_sorts)
    }
}

/// One condition of a ground rule body (statics already folded away).
#[derive(Debug, Clone, Copy)]
pub enum GCond {
    /// Inertial fluent test; `negated` is default negation.
    Inertial { slot: u32, value: bool, negated: bool },
    /// Defined fluent test under closed world.
    Defined { slot: u32, positive: bool },
}

pub type GBody = Vec<GCond>;

#[derive(Debug, Clone)]
pub struct GroundCausal {
    pub action: AtomId,
    pub head_slot: u32,
    pub head_value: bool,
    pub body: GBody,
}

#[derive(Debug, Clone)]
pub struct GroundExec {
    pub action: AtomId,
    pub body: GBody,
}

#[derive(Debug, Clone)]
pub struct GroundDefining {
    pub head_slot: u32,
    pub body: GBody,
}

#[derive(Debug, Clone)]
pub struct GroundIntegrity {
    pub head_slot: u32,
    pub head_value: bool,
    pub body: GBody,
    /// Rendered form, used in inconsistency reports.
    pub text: String,
}

#[derive(Debug, Clone)]
pub struct GroundDefault {
    pub head_slot: u32,
    pub head_value: bool,
    pub text: String,
}

#[derive(Debug, Clone)]
pub struct GroundCr {
    /// Index into the defaults vector of the same resolution.
    pub default_idx: usize,
    pub text: String,
}

#[derive(Debug, Clone)]
pub enum GoalLit {
    Inertial { slot: u32, value: bool },
    Defined { slot: u32, positive: bool },
}

#[derive(Debug, Clone)]
pub struct GroundGoal {
    /// Declaration rank: lower = higher priority.
    pub decl_idx: usize,
    pub res: Resolution,
    pub targets: Vec<GoalLit>,
    pub cond: GBody,
    pub text: String,
}

#[derive(Debug, Clone)]
pub struct GroundBridge {
    /// Coarse inertial head slot, seeded from the fine description.
    pub head_slot: u32,
    /// Fine-resolution body.
    pub body: GBody,
}

/// All ground rules of one resolution, with evaluation indexes.
#[derive(Debug, Default)]
pub struct ResTheory {
    pub actions: Vec<AtomId>,
    pub causal: Vec<GroundCausal>,
    pub causal_by_action: BTreeMap<AtomId, Vec<usize>>,
    pub exec: Vec<GroundExec>,
    pub exec_by_action: BTreeMap<AtomId, Vec<usize>>,
    pub defining: Vec<GroundDefining>,
    /// Defined slots in stratified evaluation order.
    pub defined_order: Vec<u32>,
    pub defining_by_head: BTreeMap<u32, Vec<usize>>,
    /// inertial slot -> defining rules whose body mentions it.
    pub defining_dep_inertial: BTreeMap<u32, Vec<usize>>,
    /// defined slot -> defining rules whose body mentions it.
    pub defining_dep_defined: BTreeMap<u32, Vec<usize>>,
    pub integrity: Vec<GroundIntegrity>,
    pub integrity_dep_inertial: BTreeMap<u32, Vec<usize>>,
    pub integrity_dep_defined: BTreeMap<u32, Vec<usize>>,
    pub defaults: Vec<GroundDefault>,
    pub crs: Vec<GroundCr>,
    pub n_inertial: u32,
    pub n_defined: u32,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct KindCount {
    pub enumerated: u64,
    pub retained: u64,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct ResStats {
    pub inertial_atoms: u64,
    pub defined_atoms: u64,
    pub actions: u64,
    pub causal_laws: KindCount,
    pub executability: KindCount,
    pub defining_rules: KindCount,
    pub integrity_constraints: KindCount,
    pub defaults: KindCount,
    pub cr_rules: KindCount,
    pub goals: KindCount,
}

/// Grounding report, exportable as JSON for regression pinning.
#[derive(Debug, Clone, Serialize, Default)]
pub struct GroundStats {
    pub fine: ResStats,
    pub coarse: ResStats,
    pub bridges: KindCount,
    pub static_facts: u64,
    pub total_enumerated: u64,
    pub ceiling: u64,
}

#[derive(Debug)]
pub struct GroundTheory {
    pub atoms: AtomTable,
    pub fine: ResTheory,
    pub coarse: ResTheory,
    pub bridges: Vec<GroundBridge>,
    pub goals: Vec<GroundGoal>,
    /// Cost per ground action id.
    pub costs: HashMap<AtomId, u32>,
    /// component map: (x, y) cell -> region constant.
    pub components: BTreeMap<(i64, i64), String>,
    pub stats: GroundStats,
}

impl GroundTheory {
    pub fn res(&self, r: Resolution) -> &ResTheory {
        match r {
            Resolution::Fine => &self.fine,
            Resolution::Coarse => &self.coarse,
        }
    }
    pub fn action_cost(&self, a: AtomId) -> u32 {
        self.costs.get(&a).copied().unwrap_or(1)
    }
    pub fn stats_json(&self) -> String {
        serde_json::to_string_pretty(&self.stats).expect("stats serialize")
    }
}

struct Grounder<'a> {
    d: &'a DomainDescription,
    sorts: SortTable,
    table: AtomTable,
    statics: BTreeSet<(String, Vec<Term>)>,
    ceiling: u64,
    enumerated: u64,
}

enum Folded {
    /// Condition statically false: drop the instance.
    Drop,
    /// Condition statically true: omit from the body.
    Omit,
    Keep(GCond),
}

impl<'a> Grounder<'a> {
    fn sort_members_ordered(&self, sort: &str) -> Vec<Term> {
        self.d.sort_members(sort)
    }

    /// Variables of a rule in first-occurrence order, with their sorts
    /// (intersections over all occurrences).
    fn rule_vars(&self, atoms: &[&Atom]) -> Vec<(String, Vec<Term>)> {
        let mut order: Vec<String> = Vec::new();
        let mut constraint: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for atom in atoms {
            let arg_sorts: Vec<String> = match self.d.pred(&atom.pred) {
                Some(p) => p.arg_sorts.clone(),
                None => vec![atom.pred.clone()], // sort-membership atom
            };
            for (t, s) in atom.args.iter().zip(arg_sorts.iter()) {
                if let Term::Var(v) = t {
                    if !constraint.contains_key(v) {
                        order.push(v.clone());
                    }
                    constraint.entry(v.clone()).or_default().push(s.clone());
                }
            }
        }
        order
            .into_iter()
            .map(|v| {
                let sorts = &constraint[&v];
                let mut members = self.sort_members_ordered(&sorts[0]);
                for s in &sorts[1..] {
                    let set: BTreeSet<Term> = self.sort_members_ordered(s).into_iter().collect();
                    members.retain(|m| set.contains(m));
                }
                (v, members)
            })
            .collect()
    }

    fn subst_term(t: &Term, env: &BTreeMap<&str, &Term>) -> Term {
        match t {
            Term::Var(v) => (*env.get(v.as_str()).expect("substitution covers all vars")).clone(),
            other => other.clone(),
        }
    }

    fn subst_atom(atom: &Atom, env: &BTreeMap<&str, &Term>) -> (String, Vec<Term>) {
        (atom.pred.clone(), atom.args.iter().map(|t| Self::subst_term(t, env)).collect())
    }

    /// Fold one body element under a substitution. Statics, sort atoms and
    /// built-ins resolve now; fluents become ground conditions.
    fn fold_elem(&self, e: &BodyElem, env: &BTreeMap<&str, &Term>) -> Folded {
        match e {
            BodyElem::Neq(a, b) => {
                if Self::subst_term(a, env) != Self::subst_term(b, env) {
                    Folded::Omit
                } else {
                    Folded::Drop
                }
            }
            BodyElem::Eq(a, b) => {
                if Self::subst_term(a, env) == Self::subst_term(b, env) {
                    Folded::Omit
                } else {
                    Folded::Drop
                }
            }
            BodyElem::Lit { default_neg, lit } => {
                let (pred, args) = Self::subst_atom(&lit.atom, env);
                match self.d.pred(&pred) {
                    None => {
                        // Sort-membership atom; grounding enumerates members
                        // of the variable's intersection sort, which may be
                        // narrower or wider than this atom's sort.
                        let holds = self.sorts.contains(&pred, &args[0]);
                        let want = !*default_neg;
                        if holds == want {
                            Folded::Omit
                        } else {
                            Folded::Drop
                        }
                    }
                    Some(p) if p.kind == PredKind::Static => {
                        let truth = self.statics.contains(&(pred, args));
                        // `-s` and `not s` coincide for two-valued statics.
                        let want = lit.sign == Sign::Pos && !*default_neg
                            || lit.sign == Sign::Neg && *default_neg;
                        if truth == want {
                            Folded::Omit
                        } else {
                            Folded::Drop
                        }
                    }
                    Some(p) => {
                        let id = self
                            .table
                            .lookup(&pred, &args)
                            .expect("fluent universe covers all instances");
                        let slot = self.table.slot(id);
                        match p.kind {
                            PredKind::InertialFluent => Folded::Keep(GCond::Inertial {
                                slot: slot.idx,
                                value: lit.sign == Sign::Pos,
                                negated: *default_neg,
                            }),
                            PredKind::DefinedFluent => {
                                let positive = !((lit.sign == Sign::Neg) ^ *default_neg);
                                Folded::Keep(GCond::Defined { slot: slot.idx, positive })
                            }
                            _ => unreachable!("validated body"),
                        }
                    }
                }
            }
        }
    }

    fn fold_body(&self, body: &[BodyElem], env: &BTreeMap<&str, &Term>) -> Option<GBody> {
        let mut out = Vec::new();
        for e in body {
            match self.fold_elem(e, env) {
                Folded::Drop => return None,
                Folded::Omit => {}
                Folded::Keep(c) => out.push(c),
            }
        }
        Some(out)
    }

    fn render(&self, head: Option<&Literal>, body: &[BodyElem], env: &BTreeMap<&str, &Term>) -> String {
        let mut parts = Vec::new();
        if let Some(h) = head {
            let (pred, args) = Self::subst_atom(&h.atom, env);
            let rendered = render_atom(&pred, &args);
            parts.push(if h.sign == Sign::Neg { format!("-{rendered}") } else { rendered });
        }
        let mut bodyparts = Vec::new();
        for e in body {
            match e {
                BodyElem::Lit { default_neg, lit } => {
                    let (pred, args) = Self::subst_atom(&lit.atom, env);
                    let mut s = render_atom(&pred, &args);
                    if lit.sign == Sign::Neg {
                        s = format!("-{s}");
                    }
                    if *default_neg {
                        s = format!("not {s}");
                    }
                    bodyparts.push(s);
                }
                BodyElem::Neq(a, b) => bodyparts.push(format!(
                    "{} != {}",
                    Self::subst_term(a, env),
                    Self::subst_term(b, env)
                )),
                BodyElem::Eq(a, b) => bodyparts.push(format!(
                    "{} = {}",
                    Self::subst_term(a, env),
                    Self::subst_term(b, env)
                )),
            }
        }
        if bodyparts.is_empty() {
            parts.join("")
        } else {
            format!("{} if {}", parts.join(""), bodyparts.join(", "))
        }
    }

    /// Enumerate all substitutions of a rule, calling `f` for each.
    fn for_each_subst(
        &mut self,
        atoms: &[&Atom],
        mut f: impl FnMut(&mut Self, &BTreeMap<&str, &Term>) -> Result<(), ReasonError>,
    ) -> Result<(), ReasonError> {
        let vars = self.rule_vars(atoms);
        if vars.iter().any(|(_, ms)| ms.is_empty()) {
            return Ok(()); // empty intersection: no instances
        }
        let mut counters = vec![0usize; vars.len()];
        loop {
            self.enumerated += 1;
            if self.enumerated > self.ceiling {
                return Err(ReasonError::GroundingTooLarge { ceiling: self.ceiling });
            }
            {
                let env: BTreeMap<&str, &Term> = vars
                    .iter()
                    .zip(counters.iter())
                    .map(|((v, ms), &i)| (v.as_str(), &ms[i]))
                    .collect();
                f(self, &env)?;
            }
            // Odometer increment.
            let mut pos = vars.len();
            loop {
                if pos == 0 {
                    return Ok(());
                }
                pos -= 1;
                counters[pos] += 1;
                if counters[pos] < vars[pos].1.len() {
                    break;
                }
                counters[pos] = 0;
            }
        }
    }
}

fn render_atom(pred: &str, args: &[Term]) -> String {
    if args.is_empty() {
        pred.to_string()
    } else {
        let s: Vec<String> = args.iter().map(|t| t.to_string()).collect();
        format!("{pred}({})", s.join(", "))
    }
}

pub fn ground(d: &DomainDescription) -> Result<GroundTheory, ReasonError> {
    ground_with_ceiling(d, DEFAULT_GROUND_CEILING)
}

pub fn ground_with_ceiling(d: &DomainDescription, ceiling: u64) -> Result<GroundTheory, ReasonError> {
    let sorts = build_sort_table(d).map_err(|e| ReasonError::InvalidDomain(e.to_string()))?;

    // Intern the full fluent/action universe in declaration order.
    let mut table = AtomTable {
        preds: Vec::new(),
        pred_idx: BTreeMap::new(),
        atoms: Vec::new(),
        index: HashMap::new(),
        by_slot: BTreeMap::new(),
    };
    let mut counters: BTreeMap<(Resolution, u8), u32> = BTreeMap::new();
    for p in &d.predicates {
        let pid = table.preds.len() as u32;
        table.preds.push(PredInfo {
            name: p.name.clone(),
            kind: p.kind,
            resolution: p.resolution,
            arg_sorts: p.arg_sorts.clone(),
        });
        table.pred_idx.insert(p.name.clone(), pid);
        if p.kind == PredKind::Static {
            continue;
        }
        let cat = match p.kind {
            PredKind::InertialFluent => SlotCat::Inertial,
            PredKind::DefinedFluent => SlotCat::Defined,
            PredKind::Action => SlotCat::Action,
            PredKind::Static => unreachable!(),
        };
        let member_lists: Vec<Vec<Term>> = p.arg_sorts.iter().map(|s| d.sort_members(s)).collect();
        let mut idx = vec![0usize; member_lists.len()];
        loop {
            let args: Vec<Term> = member_lists.iter().zip(idx.iter()).map(|(ms, &i)| ms[i].clone()).collect();
            let slot_idx = counters.entry((p.resolution, cat as u8)).or_insert(0);
            let slot = SlotRef { res: p.resolution, cat, idx: *slot_idx };
            *slot_idx += 1;
            let id = AtomId(table.atoms.len() as u32);
            table.index.insert((pid, args.clone()), id);
            table.by_slot.insert((p.resolution, cat as u8, slot.idx), id);
            table.atoms.push(StoredAtom { pred: pid, args, slot });
            // Odometer.
            let mut pos = member_lists.len();
            let mut done = member_lists.is_empty();
            loop {
                if pos == 0 {
                    done = true;
                    break;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < member_lists[pos].len() {
                    break;
                }
                idx[pos] = 0;
            }
            if done {
                break;
            }
        }
    }

    // Static fact set: facts from the rules section plus component entries.
    let mut statics: BTreeSet<(String, Vec<Term>)> = BTreeSet::new();
    let mut components: BTreeMap<(i64, i64), String> = BTreeMap::new();
    for r in &d.rules {
        if let Rule::Fact { atom } = r {
            statics.insert((atom.pred.clone(), atom.args.clone()));
        }
    }
    for rd in &d.resolutions {
        match rd {
            ResolutionDecl::RegionRect { name, x, y, .. } => {
                for cx in x.0..=x.1 {
                    for cy in y.0..=y.1 {
                        statics.insert((
                            "component".to_string(),
                            vec![Term::Num(cx), Term::Num(cy), Term::Const(name.clone())],
                        ));
                        components.insert((cx, cy), name.clone());
                    }
                }
            }
            ResolutionDecl::Component { x, y, region, .. } => {
                statics.insert((
                    "component".to_string(),
                    vec![Term::Num(*x), Term::Num(*y), Term::Const(region.clone())],
                ));
                components.insert((*x, *y), region.clone());
            }
        }
    }

    let n_static_facts = statics.len() as u64;
    let mut g = Grounder { d, sorts, table, statics, ceiling, enumerated: 0 };

    let mut fine = ResTheory::default();
    let mut coarse = ResTheory::default();
    for ((res, cat), n) in &counters {
        let t = if *res == Resolution::Fine { &mut fine } else { &mut coarse };
        match cat {
            x if *x == SlotCat::Inertial as u8 => t.n_inertial = *n,
            x if *x == SlotCat::Defined as u8 => t.n_defined = *n,
            _ => {}
        }
    }
    for (i, a) in g.table.atoms.iter().enumerate() {
        if a.slot.cat == SlotCat::Action {
            let t = if a.slot.res == Resolution::Fine { &mut fine } else { &mut coarse };
            t.actions.push(AtomId(i as u32));
        }
    }

    let mut bridges: Vec<GroundBridge> = Vec::new();
    let mut goals: Vec<GroundGoal> = Vec::new();
    let mut costs: HashMap<AtomId, u32> = HashMap::new();
    let mut stats = GroundStats { ceiling, static_facts: n_static_facts, ..Default::default() };
    let mut goal_decl_idx = 0usize;

    // Two-valued sanity marker for resolved res of a rule.
    let res_of = |pred: &str| -> Resolution { d.pred(pred).map(|p| p.resolution).unwrap_or(Resolution::Fine) };

    for r in &d.rules {
        match r {
            Rule::Fact { .. } => {}
            Rule::CausalLaw { action, head, body } => {
                let res = res_of(&action.pred);
                let mut atoms: Vec<&Atom> = vec![action, &head.atom];
                atoms.extend(body.iter().filter_map(|e| match e {
                    BodyElem::Lit { lit, .. } => Some(&lit.atom),
                    _ => None,
                }));
                let enumerated_before = g.enumerated;
                let mut retained = 0u64;
                let mut new_rules = Vec::new();
                g.for_each_subst(&atoms.clone(), |g, env| {
                    if let Some(gbody) = g.fold_body(body, env) {
                        let (apred, aargs) = Grounder::subst_atom(action, env);
                        let aid = g.table.lookup(&apred, &aargs).expect("action universe");
                        let (hpred, hargs) = Grounder::subst_atom(&head.atom, env);
                        let hid = g.table.lookup(&hpred, &hargs).expect("fluent universe");
                        new_rules.push(GroundCausal {
                            action: aid,
                            head_slot: g.table.slot(hid).idx,
                            head_value: head.sign == Sign::Pos,
                            body: gbody,
                        });
                        retained += 1;
                    }
                    Ok(())
                })?;
                let t = if res == Resolution::Fine { &mut fine } else { &mut coarse };
                let st = if res == Resolution::Fine { &mut stats.fine } else { &mut stats.coarse };
                st.causal_laws.enumerated += g.enumerated - enumerated_before;
                st.causal_laws.retained += retained;
                for nr in new_rules {
                    t.causal_by_action.entry(nr.action).or_default().push(t.causal.len());
                    t.causal.push(nr);
                }
            }
            Rule::Executability { action, body } => {
                let res = res_of(&action.pred);
                let mut atoms: Vec<&Atom> = vec![action];
                atoms.extend(body.iter().filter_map(|e| match e {
                    BodyElem::Lit { lit, .. } => Some(&lit.atom),
                    _ => None,
                }));
                let enumerated_before = g.enumerated;
                let mut retained = 0u64;
                let mut new_rules = Vec::new();
                g.for_each_subst(&atoms.clone(), |g, env| {
                    if let Some(gbody) = g.fold_body(body, env) {
                        let (apred, aargs) = Grounder::subst_atom(action, env);
                        let aid = g.table.lookup(&apred, &aargs).expect("action universe");
                        new_rules.push(GroundExec { action: aid, body: gbody });
                        retained += 1;
                    }
                    Ok(())
                })?;
                let t = if res == Resolution::Fine { &mut fine } else { &mut coarse };
                let st = if res == Resolution::Fine { &mut stats.fine } else { &mut stats.coarse };
                st.executability.enumerated += g.enumerated - enumerated_before;
                st.executability.retained += retained;
                for nr in new_rules {
                    t.exec_by_action.entry(nr.action).or_default().push(t.exec.len());
                    t.exec.push(nr);
                }
            }
            Rule::StateConstraint { head, body } => {
                let res = res_of(&head.atom.pred);
                let kind = d.pred(&head.atom.pred).expect("validated").kind;
                let mut atoms: Vec<&Atom> = vec![&head.atom];
                atoms.extend(body.iter().filter_map(|e| match e {
                    BodyElem::Lit { lit, .. } => Some(&lit.atom),
                    _ => None,
                }));
                let enumerated_before = g.enumerated;
                let mut retained = 0u64;
                let mut new_def = Vec::new();
                let mut new_int = Vec::new();
                g.for_each_subst(&atoms.clone(), |g, env| {
                    if let Some(gbody) = g.fold_body(body, env) {
                        let (hpred, hargs) = Grounder::subst_atom(&head.atom, env);
                        let hid = g.table.lookup(&hpred, &hargs).expect("fluent universe");
                        if kind == PredKind::DefinedFluent {
                            new_def.push(GroundDefining { head_slot: g.table.slot(hid).idx, body: gbody });
                        } else {
                            new_int.push(GroundIntegrity {
                                head_slot: g.table.slot(hid).idx,
                                head_value: head.sign == Sign::Pos,
                                body: gbody,
                                text: g.render(Some(head), body, env),
                            });
                        }
                        retained += 1;
                    }
                    Ok(())
                })?;
                let t = if res == Resolution::Fine { &mut fine } else { &mut coarse };
                let st = if res == Resolution::Fine { &mut stats.fine } else { &mut stats.coarse };
                if kind == PredKind::DefinedFluent {
                    st.defining_rules.enumerated += g.enumerated - enumerated_before;
                    st.defining_rules.retained += retained;
                    t.defining.extend(new_def);
                } else {
                    st.integrity_constraints.enumerated += g.enumerated - enumerated_before;
                    st.integrity_constraints.retained += retained;
                    t.integrity.extend(new_int);
                }
            }
            Rule::BridgeAxiom { head, body } => {
                let mut atoms: Vec<&Atom> = vec![&head.atom];
                atoms.extend(body.iter().filter_map(|e| match e {
                    BodyElem::Lit { lit, .. } => Some(&lit.atom),
                    _ => None,
                }));
                let enumerated_before = g.enumerated;
                let mut retained = 0u64;
                g.for_each_subst(&atoms.clone(), |g, env| {
                    if let Some(gbody) = g.fold_body(body, env) {
                        let (hpred, hargs) = Grounder::subst_atom(&head.atom, env);
                        let hid = g.table.lookup(&hpred, &hargs).expect("fluent universe");
                        bridges.push(GroundBridge { head_slot: g.table.slot(hid).idx, body: gbody });
                        retained += 1;
                    }
                    Ok(())
                })?;
                stats.bridges.enumerated += g.enumerated - enumerated_before;
                stats.bridges.retained += retained;
            }
            Rule::InitialDefault { head, body } => {
                let res = res_of(&head.atom.pred);
                let mut atoms: Vec<&Atom> = vec![&head.atom];
                atoms.extend(body.iter().filter_map(|e| match e {
                    BodyElem::Lit { lit, .. } => Some(&lit.atom),
                    _ => None,
                }));
                let enumerated_before = g.enumerated;
                let mut retained = 0u64;
                let mut new_defaults = Vec::new();
                g.for_each_subst(&atoms.clone(), |g, env| {
                    // Default bodies are statics-only; fold either drops the
                    // instance or leaves an empty body.
                    if let Some(gbody) = g.fold_body(body, env) {
                        debug_assert!(gbody.is_empty());
                        let (hpred, hargs) = Grounder::subst_atom(&head.atom, env);
                        let hid = g.table.lookup(&hpred, &hargs).expect("fluent universe");
                        new_defaults.push(GroundDefault {
                            head_slot: g.table.slot(hid).idx,
                            head_value: head.sign == Sign::Pos,
                            text: g.render(Some(head), body, env),
                        });
                        retained += 1;
                    }
                    Ok(())
                })?;
                let t = if res == Resolution::Fine { &mut fine } else { &mut coarse };
                let st = if res == Resolution::Fine { &mut stats.fine } else { &mut stats.coarse };
                st.defaults.enumerated += g.enumerated - enumerated_before;
                for nd in new_defaults {
                    if !t.defaults.iter().any(|x| x.head_slot == nd.head_slot && x.head_value == nd.head_value) {
                        t.defaults.push(nd);
                        st.defaults.retained += 1;
                    }
                }
                let _ = retained;
            }
            Rule::CrRule { head, body } => {
                let res = res_of(&head.atom.pred);
                let mut atoms: Vec<&Atom> = vec![&head.atom];
                atoms.extend(body.iter().filter_map(|e| match e {
                    BodyElem::Lit { lit, .. } => Some(&lit.atom),
                    _ => None,
                }));
                let enumerated_before = g.enumerated;
                let mut new_crs = Vec::new();
                g.for_each_subst(&atoms.clone(), |g, env| {
                    if g.fold_body(body, env).is_some() {
                        let (hpred, hargs) = Grounder::subst_atom(&head.atom, env);
                        let hid = g.table.lookup(&hpred, &hargs).expect("fluent universe");
                        let slot = g.table.slot(hid).idx;
                        let value = head.sign == Sign::Pos;
                        new_crs.push((slot, value, g.render(Some(head), body, env)));
                    }
                    Ok(())
                })?;
                let t = if res == Resolution::Fine { &mut fine } else { &mut coarse };
                let st = if res == Resolution::Fine { &mut stats.fine } else { &mut stats.coarse };
                st.cr_rules.enumerated += g.enumerated - enumerated_before;
                for (slot, value, text) in new_crs {
                    // A CR instance is live only if it overrides a ground default.
                    if let Some(di) = t
                        .defaults
                        .iter()
                        .position(|dflt| dflt.head_slot == slot && dflt.head_value == !value)
                    {
                        if !t.crs.iter().any(|c| c.default_idx == di) {
                            t.crs.push(GroundCr { default_idx: di, text });
                            st.cr_rules.retained += 1;
                        }
                    }
                }
            }
            Rule::CostDecl { action, cost } => {
                let mut new_costs = Vec::new();
                g.for_each_subst(&[action], |g, env| {
                    let (apred, aargs) = Grounder::subst_atom(action, env);
                    let aid = g.table.lookup(&apred, &aargs).expect("action universe");
                    new_costs.push((aid, *cost));
                    Ok(())
                })?;
                costs.extend(new_costs);
            }
            Rule::GoalDecl { targets, when } => {
                let res = targets
                    .first()
                    .map(|t| res_of(&t.atom.pred))
                    .unwrap_or(Resolution::Fine);
                let mut atoms: Vec<&Atom> = targets.iter().map(|t| &t.atom).collect();
                atoms.extend(when.iter().filter_map(|e| match e {
                    BodyElem::Lit { lit, .. } => Some(&lit.atom),
                    _ => None,
                }));
                let enumerated_before = g.enumerated;
                let mut retained = 0u64;
                let decl = goal_decl_idx;
                let mut new_goals = Vec::new();
                g.for_each_subst(&atoms.clone(), |g, env| {
                    if let Some(cond) = g.fold_body(when, env) {
                        let mut glits = Vec::new();
                        let mut texts = Vec::new();
                        for tlit in targets {
                            let (tpred, targs) = Grounder::subst_atom(&tlit.atom, env);
                            let tid = g.table.lookup(&tpred, &targs).expect("fluent universe");
                            let slot = g.table.slot(tid);
                            let rendered = render_atom(&tpred, &targs);
                            texts.push(if tlit.sign == Sign::Neg {
                                format!("-{rendered}")
                            } else {
                                rendered
                            });
                            match slot.cat {
                                SlotCat::Inertial => glits.push(GoalLit::Inertial {
                                    slot: slot.idx,
                                    value: tlit.sign == Sign::Pos,
                                }),
                                SlotCat::Defined => glits.push(GoalLit::Defined {
                                    slot: slot.idx,
                                    positive: tlit.sign == Sign::Pos,
                                }),
                                SlotCat::Action => unreachable!("validated goal targets"),
                            }
                        }
                        new_goals.push(GroundGoal {
                            decl_idx: decl,
                            res,
                            targets: glits,
                            cond,
                            text: texts.join(", "),
                        });
                        retained += 1;
                    }
                    Ok(())
                })?;
                let st = if res == Resolution::Fine { &mut stats.fine } else { &mut stats.coarse };
                st.goals.enumerated += g.enumerated - enumerated_before;
                st.goals.retained += retained;
                goals.extend(new_goals);
                goal_decl_idx += 1;
            }
        }
    }

    stats.total_enumerated = g.enumerated;
    stats.fine.inertial_atoms = fine.n_inertial as u64;
    stats.fine.defined_atoms = fine.n_defined as u64;
    stats.fine.actions = fine.actions.len() as u64;
    stats.coarse.inertial_atoms = coarse.n_inertial as u64;
    stats.coarse.defined_atoms = coarse.n_defined as u64;
    stats.coarse.actions = coarse.actions.len() as u64;

    for (res, t) in [(Resolution::Fine, &mut fine), (Resolution::Coarse, &mut coarse)] {
        build_indexes(d, &g.table, res, t);
    }

    Ok(GroundTheory {
        atoms: g.table,
        fine,
        coarse,
        bridges,
        goals,
        costs,
        components,
        stats,
    })
}

/// Stratified evaluation order for defined slots plus dependency indexes.
fn build_indexes(d: &DomainDescription, table: &AtomTable, res: Resolution, t: &mut ResTheory) {
    for (i, r) in t.defining.iter().enumerate() {
        t.defining_by_head.entry(r.head_slot).or_default().push(i);
        for c in &r.body {
            match c {
                GCond::Inertial { slot, .. } => {
                    t.defining_dep_inertial.entry(*slot).or_default().push(i)
                }
                GCond::Defined { slot, .. } => {
                    t.defining_dep_defined.entry(*slot).or_default().push(i)
                }
            }
        }
    }
    for (i, r) in t.integrity.iter().enumerate() {
        t.integrity_dep_inertial.entry(r.head_slot).or_default().push(i);
        for c in &r.body {
            match c {
                GCond::Inertial { slot, .. } => {
                    t.integrity_dep_inertial.entry(*slot).or_default().push(i)
                }
                GCond::Defined { slot, .. } => {
                    t.integrity_dep_defined.entry(*slot).or_default().push(i)
                }
            }
        }
    }

    // Predicate-level topological order (validation guarantees acyclicity),
    // then slots in id order within a predicate.
    let mut pred_rank: BTreeMap<String, usize> = BTreeMap::new();
    let mut deps: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for r in &d.rules {
        if let Rule::StateConstraint { head, body } = r {
            let Some(hp) = d.pred(&head.atom.pred) else { continue };
            if hp.kind != PredKind::DefinedFluent || hp.resolution != res {
                continue;
            }
            let entry = deps.entry(head.atom.pred.clone()).or_default();
            for e in body {
                if let BodyElem::Lit { lit, .. } = e {
                    if let Some(bp) = d.pred(&lit.atom.pred) {
                        if bp.kind == PredKind::DefinedFluent {
                            entry.insert(lit.atom.pred.clone());
                        }
                    }
                }
            }
        }
    }
    fn rank(
        p: &str,
        deps: &BTreeMap<String, BTreeSet<String>>,
        out: &mut BTreeMap<String, usize>,
    ) -> usize {
        if let Some(r) = out.get(p) {
            return *r;
        }
        let r = deps
            .get(p)
            .map(|ds| ds.iter().map(|q| rank(q, deps, out) + 1).max().unwrap_or(0))
            .unwrap_or(0);
        out.insert(p.to_string(), r);
        r
    }
    let preds: Vec<String> = deps.keys().cloned().collect();
    for p in &preds {
        rank(p, &deps, &mut pred_rank);
    }
    let mut order: Vec<(usize, u32)> = (0..t.n_defined)
        .map(|slot| {
            let id = table.atom_by_slot(res, SlotCat::Defined, slot);
            let name = &table.pred_info(id).name;
            (pred_rank.get(name).copied().unwrap_or(0), slot)
        })
        .collect();
    order.sort();
    t.defined_order = order.into_iter().map(|(_, s)| s).collect();
}
