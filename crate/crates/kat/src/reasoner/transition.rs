//! The state transition function: executability, direct effects, inertia,
//! closure.

use crate::rulelang::Resolution;

use super::belief::{body_holds, close_incremental, BeliefState, Truth};
use super::ground::{AtomId, GroundTheory};
use super::ReasonError;

#[derive(Debug, Clone, PartialEq)]
pub enum TransitionOutcome {
    State(BeliefState),
    /// Some executability condition fired; planners prune this branch.
    Inexecutable,
}

pub fn transition(
    th: &GroundTheory,
    res: Resolution,
    s: &BeliefState,
    action: AtomId,
) -> Result<TransitionOutcome, ReasonError> {
    debug_assert_eq!(s.res, res);
    let t = th.res(res);

    if let Some(rules) = t.exec_by_action.get(&action) {
        for &ri in rules {
            if body_holds(&t.exec[ri].body, s) {
                return Ok(TransitionOutcome::Inexecutable);
            }
        }
    }

    // Direct effects: heads of causal laws whose bodies hold now.
    let mut effects: Vec<(u32, Truth)> = Vec::new();
    if let Some(rules) = t.causal_by_action.get(&action) {
        for &ri in rules {
            let law = &t.causal[ri];
            if body_holds(&law.body, s) {
                let v = Truth::from_bool(law.head_value);
                if let Some(prev) = effects.iter().find(|(slot, _)| *slot == law.head_slot) {
                    if prev.1 != v {
                        let atom = th.atoms.atom_by_slot(res, super::ground::SlotCat::Inertial, law.head_slot);
                        return Err(ReasonError::ConflictingEffects { atom: th.atoms.display(atom) });
                    }
                } else {
                    effects.push((law.head_slot, v));
                }
            }
        }
    }

    // Inertia holds by construction: unchanged slots copy from `s`.
    let next = close_incremental(th, res, s, &effects, s.step + 1)?;
    Ok(TransitionOutcome::State(next))
}
