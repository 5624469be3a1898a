//! Belief states and the closed-world closure over defined fluents.

use crate::rulelang::Resolution;

use super::ground::{GBody, GCond, GroundTheory, ResTheory, SlotCat};
use super::ReasonError;

/// Three-valued assignment of a ground inertial fluent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Truth {
    Unknown = 0,
    True = 1,
    False = 2,
}

impl Truth {
    pub fn from_bool(b: bool) -> Truth {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }
}

/// Completed literal set at one step: inertial assignments plus the closure
/// of the defined fluents. Construct via [`close`] so the invariants hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeliefState {
    pub step: u32,
    pub res: Resolution,
    pub(crate) inertial: Vec<Truth>,
    pub(crate) defined: Vec<bool>,
}

impl BeliefState {
    /// All-unknown assignment (defined fluents all false until closed).
    pub fn unknown(th: &GroundTheory, res: Resolution) -> Self {
        let t = th.res(res);
        BeliefState {
            step: 0,
            res,
            inertial: vec![Truth::Unknown; t.n_inertial as usize],
            defined: vec![false; t.n_defined as usize],
        }
    }

    pub fn inertial_truth(&self, slot: u32) -> Truth {
        self.inertial[slot as usize]
    }
    pub fn defined_holds(&self, slot: u32) -> bool {
        self.defined[slot as usize]
    }

    /// Fingerprint of the inertial assignment (defined fluents are a
    /// function of it, statics are theory-fixed).
    pub fn key(&self) -> Box<[u8]> {
        self.inertial.iter().map(|t| *t as u8).collect()
    }
}

pub(crate) fn body_holds(body: &GBody, s: &BeliefState) -> bool {
    body.iter().all(|c| cond_holds(c, s))
}

pub(crate) fn cond_holds(c: &GCond, s: &BeliefState) -> bool {
    match c {
        GCond::Inertial { slot, value, negated } => {
            let t = s.inertial[*slot as usize];
            let holds = t == Truth::from_bool(*value);
            if *negated {
                !holds
            } else {
                holds
            }
        }
        GCond::Defined { slot, positive } => s.defined[*slot as usize] == *positive,
    }
}

/// Violated ground integrity constraint, if any: body holds and the head
/// literal is known-opposite. Unknown heads claim nothing.
fn integrity_violation(t: &ResTheory, s: &BeliefState) -> Option<String> {
    for r in &t.integrity {
        if body_holds(&r.body, s) {
            let h = s.inertial[r.head_slot as usize];
            if h == Truth::from_bool(!r.head_value) {
                return Some(r.text.clone());
            }
        }
    }
    None
}

/// Compute the closure of an inertial assignment from scratch: defined
/// fluents are derived to a fixpoint in stratum order, everything not
/// derivable is false, then integrity constraints are checked.
pub fn close(
    th: &GroundTheory,
    res: Resolution,
    step: u32,
    inertial: Vec<Truth>,
) -> Result<BeliefState, ReasonError> {
    let t = th.res(res);
    debug_assert_eq!(inertial.len(), t.n_inertial as usize);
    let mut s = BeliefState { step, res, inertial, defined: vec![false; t.n_defined as usize] };
    // Stratified: one pass in dependency order suffices, but iterate to a
    // fixpoint anyway so the closure is robust against index drift.
    loop {
        let mut changed = false;
        for &slot in &t.defined_order {
            let derived = t
                .defining_by_head
                .get(&slot)
                .map(|rules| rules.iter().any(|&i| body_holds(&t.defining[i].body, &s)))
                .unwrap_or(false);
            if s.defined[slot as usize] != derived {
                s.defined[slot as usize] = derived;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if let Some(rule) = integrity_violation(t, &s) {
        return Err(ReasonError::Inconsistent { rule });
    }
    Ok(s)
}

/// Re-close after point changes to the inertial assignment of `prev`
/// (which must itself be closed and consistent). Only defined atoms
/// reachable from the changed slots are re-derived; integrity constraints
/// touching changed atoms are re-checked.
pub fn close_incremental(
    th: &GroundTheory,
    res: Resolution,
    prev: &BeliefState,
    changes: &[(u32, Truth)],
    step: u32,
) -> Result<BeliefState, ReasonError> {
    let t = th.res(res);
    let mut s = prev.clone();
    s.step = step;
    let mut touched_inertial: Vec<u32> = Vec::new();
    for (slot, v) in changes {
        if s.inertial[*slot as usize] != *v {
            s.inertial[*slot as usize] = *v;
            touched_inertial.push(*slot);
        }
    }

    // Defined slots possibly affected, processed in stratified order.
    let mut dirty: Vec<bool> = vec![false; t.n_defined as usize];
    for slot in &touched_inertial {
        if let Some(rules) = t.defining_dep_inertial.get(slot) {
            for &ri in rules {
                dirty[t.defining[ri].head_slot as usize] = true;
            }
        }
    }
    let mut touched_defined: Vec<u32> = Vec::new();
    for &slot in &t.defined_order {
        if !dirty[slot as usize] {
            continue;
        }
        let derived = t
            .defining_by_head
            .get(&slot)
            .map(|rules| rules.iter().any(|&i| body_holds(&t.defining[i].body, &s)))
            .unwrap_or(false);
        if s.defined[slot as usize] != derived {
            s.defined[slot as usize] = derived;
            touched_defined.push(slot);
            if let Some(rules) = t.defining_dep_defined.get(&slot) {
                for &ri in rules {
                    dirty[t.defining[ri].head_slot as usize] = true;
                }
            }
        }
    }

    // Integrity constraints touching any changed atom.
    let mut checked: Vec<usize> = Vec::new();
    for slot in &touched_inertial {
        if let Some(rules) = t.integrity_dep_inertial.get(slot) {
            checked.extend(rules.iter().copied());
        }
    }
    for slot in &touched_defined {
        if let Some(rules) = t.integrity_dep_defined.get(slot) {
            checked.extend(rules.iter().copied());
        }
    }
    checked.sort_unstable();
    checked.dedup();
    for ri in checked {
        let r = &t.integrity[ri];
        if body_holds(&r.body, &s) {
            let h = s.inertial[r.head_slot as usize];
            if h == Truth::from_bool(!r.head_value) {
                return Err(ReasonError::Inconsistent { rule: r.text.clone() });
            }
        }
    }
    Ok(s)
}

/// Abstract a fine belief into the coarse description by evaluating the
/// bridge axioms under closed world: a coarse inertial atom is true iff
/// some bridge rule derives it, false otherwise.
pub fn abstract_to_coarse(th: &GroundTheory, fine: &BeliefState) -> Result<BeliefState, ReasonError> {
    debug_assert_eq!(fine.res, Resolution::Fine);
    let coarse = th.res(Resolution::Coarse);
    let mut inertial = vec![Truth::False; coarse.n_inertial as usize];
    for b in &th.bridges {
        if body_holds(&b.body, fine) {
            inertial[b.head_slot as usize] = Truth::True;
        }
    }
    close(th, Resolution::Coarse, fine.step, inertial)
}

/// True iff a single coarse inertial literal holds under bridge abstraction
/// of a fine belief (used as the cross-resolution goal test).
pub fn bridge_literal_holds(th: &GroundTheory, fine: &BeliefState, coarse_slot: u32, value: bool) -> bool {
    let derived = th
        .bridges
        .iter()
        .any(|b| b.head_slot == coarse_slot && body_holds(&b.body, fine));
    derived == value
}

/// Convenience accessors keyed by atom id.
impl BeliefState {
    pub fn get(&self, th: &GroundTheory, atom: super::ground::AtomId) -> Option<Truth> {
        let slot = th.atoms.slot(atom);
        if slot.res != self.res {
            return None;
        }
        match slot.cat {
            SlotCat::Inertial => Some(self.inertial[slot.idx as usize]),
            SlotCat::Defined => Some(Truth::from_bool(self.defined[slot.idx as usize])),
            SlotCat::Action => None,
        }
    }
}
