//! Reality check: compare expected belief against fresh observations.

use super::belief::{BeliefState, Truth};
use super::ground::{AtomId, GroundTheory, SlotCat};

#[derive(Debug, Clone, PartialEq)]
pub enum MonitorOutcome {
    Ok,
    /// Every observed fluent whose value contradicts the expectation.
    ReplanNeeded(Vec<(AtomId, bool)>),
}

pub fn monitor(th: &GroundTheory, expected: &BeliefState, observed: &[(AtomId, bool)]) -> MonitorOutcome {
    let mut mismatches = Vec::new();
    for (atom, value) in observed {
        let slot = th.atoms.slot(*atom);
        if slot.res != expected.res || slot.cat != SlotCat::Inertial {
            continue;
        }
        let want = Truth::from_bool(*value);
        let have = expected.inertial_truth(slot.idx);
        if have != Truth::Unknown && have != want {
            mismatches.push((*atom, *value));
        }
    }
    if mismatches.is_empty() {
        MonitorOutcome::Ok
    } else {
        MonitorOutcome::ReplanNeeded(mismatches)
    }
}
