//! Initial-state completion: observations, defaults, and minimal
//! consistency-restoring retraction.

use crate::rulelang::Resolution;

use super::belief::{close, BeliefState, Truth};
use super::ground::{AtomId, GroundTheory, SlotCat};
use super::ReasonError;

/// Brute-force subset search is exact; cap the CR count so it stays sane.
const MAX_CR_BRUTE: usize = 16;

#[derive(Debug, Clone)]
pub struct Completion {
    pub belief: BeliefState,
    /// Indices into the resolution's CR rule list, ascending.
    pub applied_crs: Vec<usize>,
}

/// Complete a step-0 belief: close observations together with the
/// conclusions of all defaults, applying a cardinality-minimal set of CR
/// rules (lexicographically first by declaration order among equals) when
/// the defaults contradict the observations or the constraints.
pub fn complete_initial_state(
    th: &GroundTheory,
    res: Resolution,
    obs: &[(AtomId, bool)],
) -> Result<Completion, ReasonError> {
    let t = th.res(res);
    let mut base = vec![Truth::Unknown; t.n_inertial as usize];
    for (atom, value) in obs {
        let slot = th.atoms.slot(*atom);
        if slot.res != res || slot.cat != SlotCat::Inertial {
            return Err(ReasonError::InvalidObservation(th.atoms.display(*atom)));
        }
        let v = Truth::from_bool(*value);
        let cur = &mut base[slot.idx as usize];
        if *cur != Truth::Unknown && *cur != v {
            return Err(ReasonError::ContradictoryObservations { atom: th.atoms.display(*atom) });
        }
        *cur = v;
    }

    let n = t.crs.len();
    if n > MAX_CR_BRUTE {
        return Err(ReasonError::TooManyCrRules { count: n, max: MAX_CR_BRUTE });
    }

    // Try CR subsets by ascending cardinality, lexicographic within a size.
    for k in 0..=n {
        let mut combo: Vec<usize> = (0..k).collect();
        loop {
            if let Some(belief) = try_candidate(th, res, &base, &combo)? {
                return Ok(Completion { belief, applied_crs: combo });
            }
            if !next_combination(&mut combo, n) {
                break;
            }
        }
    }
    Err(ReasonError::NoConsistentCompletion)
}

/// Build and close one candidate; `None` means this CR subset does not
/// restore consistency.
fn try_candidate(
    th: &GroundTheory,
    res: Resolution,
    base: &[Truth],
    crs: &[usize],
) -> Result<Option<BeliefState>, ReasonError> {
    let t = th.res(res);
    let mut inertial = base.to_vec();
    let mut retracted = vec![false; t.defaults.len()];

    // CR conclusions: the negation of the retracted default's head.
    for &ci in crs {
        let cr = &t.crs[ci];
        retracted[cr.default_idx] = true;
        let d = &t.defaults[cr.default_idx];
        let v = Truth::from_bool(!d.head_value);
        let cur = &mut inertial[d.head_slot as usize];
        if *cur != Truth::Unknown && *cur != v {
            return Ok(None);
        }
        *cur = v;
    }
    // Remaining default conclusions.
    for (di, d) in t.defaults.iter().enumerate() {
        if retracted[di] {
            continue;
        }
        let v = Truth::from_bool(d.head_value);
        let cur = &mut inertial[d.head_slot as usize];
        if *cur != Truth::Unknown && *cur != v {
            return Ok(None);
        }
        *cur = v;
    }
    match close(th, res, 0, inertial) {
        Ok(b) => Ok(Some(b)),
        Err(ReasonError::Inconsistent { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Advance `combo` to the next k-combination of `0..n` in lexicographic
/// order; false when exhausted.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    loop {
        if i == 0 {
            return false;
        }
        i -= 1;
        if combo[i] < n - (k - i) {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
}
