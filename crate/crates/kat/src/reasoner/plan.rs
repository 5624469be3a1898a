//! Goal selection, uniform-cost planning, and coarse-to-fine refinement.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::rulelang::{Resolution, Term};

use super::belief::{abstract_to_coarse, body_holds, bridge_literal_holds, BeliefState, Truth};
use super::ground::{AtomId, GoalLit, GroundTheory, SlotCat};
use super::transition::{transition, TransitionOutcome};
use super::ReasonError;

pub const DEFAULT_FINE_HORIZON: u32 = 6;
pub const DEFAULT_COARSE_HORIZON: u32 = 3;

/// A selected, ground goal instance.
#[derive(Debug, Clone)]
pub struct Goal {
    /// Declaration rank; lower is higher priority.
    pub priority: usize,
    pub res: Resolution,
    pub targets: Vec<GoalLit>,
    pub text: String,
}

/// Highest-priority goal whose applicability condition holds in `s`.
/// Declarations rank by order of appearance; instances of one declaration
/// rank by grounding order. `None` when no declaration of this resolution
/// applies (domains declare an unconditional positioning goal last to make
/// that unreachable).
pub fn select_goal(th: &GroundTheory, s: &BeliefState) -> Option<Goal> {
    applicable_goals(th, s).into_iter().next()
}

/// Every applicable goal instance in priority order; callers that fail to
/// plan the first may fall through to the next.
pub fn applicable_goals(th: &GroundTheory, s: &BeliefState) -> Vec<Goal> {
    th.goals
        .iter()
        .filter(|g| g.res == s.res)
        .filter(|g| body_holds(&g.cond, s))
        .map(|g| Goal {
            priority: g.decl_idx,
            res: g.res,
            targets: g.targets.clone(),
            text: g.text.clone(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    /// Ground actions in execution order; the step index is the position.
    pub actions: Vec<AtomId>,
    pub total_cost: u64,
}

impl Plan {
    pub fn empty() -> Self {
        Plan { actions: Vec::new(), total_cost: 0 }
    }
    pub fn display(&self, th: &GroundTheory) -> String {
        self.actions
            .iter()
            .enumerate()
            .map(|(i, a)| format!("{}: {}", i, th.atoms.display(*a)))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlanOutcome {
    Plan(Plan),
    NoPlan,
}

/// Goal test used by the search: literal targets at the search resolution,
/// or coarse inertial literals checked through the bridge axioms.
#[derive(Debug, Clone)]
pub enum GoalTest {
    Direct(Vec<GoalLit>),
    Bridge(Vec<(u32, bool)>),
}

impl GoalTest {
    fn satisfied(&self, th: &GroundTheory, s: &BeliefState) -> bool {
        match self {
            GoalTest::Direct(lits) => lits.iter().all(|l| match l {
                GoalLit::Inertial { slot, value } => {
                    s.inertial_truth(*slot) == Truth::from_bool(*value)
                }
                GoalLit::Defined { slot, positive } => s.defined_holds(*slot) == *positive,
            }),
            GoalTest::Bridge(lits) => lits
                .iter()
                .all(|(slot, value)| bridge_literal_holds(th, s, *slot, *value)),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct PlanOptions {
    /// Restrict the search to these ground actions (refinement restriction).
    pub allowed_actions: Option<Vec<AtomId>>,
    /// Never expand these ground actions (coarse replanning exclusions).
    pub banned_actions: Vec<AtomId>,
}

struct Node {
    cost: u64,
    seq: Vec<u32>,
    belief: BeliefState,
}

impl Node {
    fn key(&self) -> (u64, usize, &[u32]) {
        (self.cost, self.seq.len(), &self.seq)
    }
}
impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; reverse for uniform-cost order. Ties
        // break on shorter plans, then on the action-ordinal sequence.
        other.key().cmp(&self.key())
    }
}

/// Uniform-cost search over the grounded transition diagram. Returns the
/// minimum-total-cost plan of length <= horizon; ties prefer shorter plans,
/// then the lexicographically first action sequence (by canonical action
/// order).
pub fn plan(
    th: &GroundTheory,
    s: &BeliefState,
    goal: &GoalTest,
    horizon: u32,
    opts: &PlanOptions,
) -> Result<PlanOutcome, ReasonError> {
    Ok(match plan_with_final(th, s, goal, horizon, opts)? {
        Some((p, _)) => PlanOutcome::Plan(p),
        None => PlanOutcome::NoPlan,
    })
}

pub(crate) fn plan_with_final(
    th: &GroundTheory,
    s: &BeliefState,
    goal: &GoalTest,
    horizon: u32,
    opts: &PlanOptions,
) -> Result<Option<(Plan, BeliefState)>, ReasonError> {
    let t = th.res(s.res);
    let actions: Vec<(u32, AtomId)> = t
        .actions
        .iter()
        .enumerate()
        .map(|(i, a)| (i as u32, *a))
        .filter(|(_, a)| {
            opts.allowed_actions.as_ref().map(|set| set.contains(a)).unwrap_or(true)
                && !opts.banned_actions.contains(a)
        })
        .collect();

    let mut heap: BinaryHeap<Node> = BinaryHeap::new();
    let mut popped: HashMap<Box<[u8]>, ()> = HashMap::new();
    heap.push(Node { cost: 0, seq: Vec::new(), belief: s.clone() });

    while let Some(node) = heap.pop() {
        if popped.contains_key(&node.belief.key()) {
            continue;
        }
        if goal.satisfied(th, &node.belief) {
            let plan_actions: Vec<AtomId> =
                node.seq.iter().map(|&o| t.actions[o as usize]).collect();
            return Ok(Some((Plan { actions: plan_actions, total_cost: node.cost }, node.belief)));
        }
        popped.insert(node.belief.key(), ());
        if node.seq.len() as u32 >= horizon {
            continue;
        }
        for &(ordinal, action) in &actions {
            match transition(th, node.belief.res, &node.belief, action)? {
                TransitionOutcome::Inexecutable => continue,
                TransitionOutcome::State(next) => {
                    if popped.contains_key(&next.key()) {
                        continue;
                    }
                    let mut seq = node.seq.clone();
                    seq.push(ordinal);
                    heap.push(Node {
                        cost: node.cost + th.action_cost(action) as u64,
                        seq,
                        belief: next,
                    });
                }
            }
        }
    }
    Ok(None)
}

/// Plan toward a selected goal from a belief of matching resolution, or a
/// fine belief against a coarse goal (bridge abstraction test).
pub fn plan_goal(
    th: &GroundTheory,
    s: &BeliefState,
    goal: &Goal,
    horizon: u32,
    opts: &PlanOptions,
) -> Result<PlanOutcome, ReasonError> {
    let test = make_goal_test(s.res, goal)?;
    plan(th, s, &test, horizon, opts)
}

fn make_goal_test(search_res: Resolution, goal: &Goal) -> Result<GoalTest, ReasonError> {
    if goal.res == search_res {
        return Ok(GoalTest::Direct(goal.targets.clone()));
    }
    if search_res == Resolution::Fine && goal.res == Resolution::Coarse {
        let mut lits = Vec::new();
        for t in &goal.targets {
            match t {
                GoalLit::Inertial { slot, value } => lits.push((*slot, *value)),
                GoalLit::Defined { .. } => {
                    return Err(ReasonError::InvalidGoal(
                        "coarse defined fluents cannot be goal targets across resolutions".into(),
                    ))
                }
            }
        }
        return Ok(GoalTest::Bridge(lits));
    }
    Err(ReasonError::InvalidGoal("cannot plan a fine goal from a coarse state".into()))
}

#[derive(Debug, Clone)]
pub struct RefineFailure {
    pub step_idx: usize,
    pub coarse_action: AtomId,
}

#[derive(Debug)]
pub enum RefineError {
    /// Some coarse step has no fine realization; replan at the coarse level
    /// with this action excluded.
    Failure(RefineFailure),
    Domain(ReasonError),
}

impl From<ReasonError> for RefineError {
    fn from(e: ReasonError) -> Self {
        RefineError::Domain(e)
    }
}

/// Expand a coarse plan into a fine plan. Each coarse action becomes a
/// fine sub-plan restricted (via the component relation) to the regions the
/// action touches, targeting the coarse literals the action changes; the
/// final fine state must abstract back to the coarse plan's final state.
pub fn refine(
    th: &GroundTheory,
    coarse_plan: &Plan,
    s_fine: &BeliefState,
    fine_horizon: u32,
) -> Result<Plan, RefineError> {
    let coarse = th.res(Resolution::Coarse);
    let mut cur_fine = s_fine.clone();
    let mut cur_coarse = abstract_to_coarse(th, &cur_fine)?;
    let mut out = Plan::empty();

    let region_names: std::collections::BTreeSet<&str> =
        th.components.values().map(|s| s.as_str()).collect();

    for (i, &ca) in coarse_plan.actions.iter().enumerate() {
        let next_coarse = match transition(th, Resolution::Coarse, &cur_coarse, ca)? {
            TransitionOutcome::State(b) => b,
            TransitionOutcome::Inexecutable => {
                return Err(RefineError::Failure(RefineFailure { step_idx: i, coarse_action: ca }))
            }
        };

        // Coarse literals this action changes.
        let mut diffs: Vec<(u32, bool)> = Vec::new();
        for slot in 0..coarse.n_inertial {
            let before = cur_coarse.inertial_truth(slot);
            let after = next_coarse.inertial_truth(slot);
            if before != after {
                match after {
                    Truth::True => diffs.push((slot, true)),
                    Truth::False => diffs.push((slot, false)),
                    Truth::Unknown => {}
                }
            }
        }

        // Regions the coarse action touches: its own region arguments plus
        // the regions of true coarse atoms that mention its other arguments.
        let mut allowed_regions: std::collections::BTreeSet<String> = Default::default();
        let mut plain_args: Vec<&Term> = Vec::new();
        for arg in th.atoms.args(ca) {
            match arg {
                Term::Const(c) if region_names.contains(c.as_str()) => {
                    allowed_regions.insert(c.clone());
                }
                other => plain_args.push(other),
            }
        }
        for slot in 0..coarse.n_inertial {
            if cur_coarse.inertial_truth(slot) != Truth::True {
                continue;
            }
            let atom = th.atoms.atom_by_slot(Resolution::Coarse, SlotCat::Inertial, slot);
            let args = th.atoms.args(atom);
            if !args.iter().any(|a| plain_args.contains(&a)) {
                continue;
            }
            for arg in args {
                if let Term::Const(c) = arg {
                    if region_names.contains(c.as_str()) {
                        allowed_regions.insert(c.clone());
                    }
                }
            }
        }

        let allowed = allowed_fine_actions(th, &allowed_regions);
        let opts = PlanOptions { allowed_actions: Some(allowed), banned_actions: Vec::new() };
        let sub = plan_with_final(th, &cur_fine, &GoalTest::Bridge(diffs), fine_horizon, &opts)?;
        let Some((sub_plan, final_fine)) = sub else {
            return Err(RefineError::Failure(RefineFailure { step_idx: i, coarse_action: ca }));
        };
        out.total_cost += sub_plan.total_cost;
        out.actions.extend(sub_plan.actions);
        cur_fine = final_fine;
        cur_coarse = next_coarse;
    }

    // The concatenation must abstract back to the coarse plan's final state.
    let abstracted = abstract_to_coarse(th, &cur_fine)?;
    if abstracted.inertial != cur_coarse.inertial {
        return Err(RefineError::Domain(ReasonError::InvalidGoal(
            "refined plan does not abstract to the coarse final state".into(),
        )));
    }
    Ok(out)
}

/// Fine actions whose cell arguments all fall inside the allowed regions.
/// Cell arguments are consecutive argument pairs declared with the
/// component relation's coordinate sorts; actions without cell arguments
/// are always allowed.
fn allowed_fine_actions(
    th: &GroundTheory,
    allowed_regions: &std::collections::BTreeSet<String>,
) -> Vec<AtomId> {
    let comp_sorts: Option<(String, String)> = th
        .atoms
        .pred_arg_sorts("component")
        .map(|s| (s[0].clone(), s[1].clone()));
    th.fine
        .actions
        .iter()
        .copied()
        .filter(|a| {
            let Some((ref sx, ref sy)) = comp_sorts else { return true };
            let info = th.atoms.pred_info(*a);
            let args = th.atoms.args(*a);
            let mut k = 0;
            while k + 1 < info.arg_sorts.len() {
                if &info.arg_sorts[k] == sx && &info.arg_sorts[k + 1] == sy {
                    if let (Term::Num(x), Term::Num(y)) = (&args[k], &args[k + 1]) {
                        match th.components.get(&(*x, *y)) {
                            Some(rg) if allowed_regions.contains(rg) => {}
                            _ => return false,
                        }
                    }
                    k += 2;
                } else {
                    k += 1;
                }
            }
            true
        })
        .collect()
}
