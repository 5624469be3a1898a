//! Shared fixtures and independent oracles for the reasoner test suites.
//!
//! The oracles here deliberately re-derive results by brute force
//! (exhaustive plan enumeration, CR subset search, naive split scans) and
//! must stay independent of the library's search/induction paths.

#![allow(dead_code)]

use kat::reasoner::{
    ground, transition, AtomId, BeliefState, GoalTest, GroundTheory, Plan, ReasonError,
    TransitionOutcome, Truth,
};
use kat::rulelang::{parse_domain, DomainDescription, Resolution, Term};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Parse an atom handle like `loc(aha, 3, 2)` into its interned id.
pub fn atom(th: &GroundTheory, text: &str) -> AtomId {
    let (pred, args) = parse_atom_text(text);
    th.atoms
        .lookup(&pred, &args)
        .unwrap_or_else(|| panic!("unknown atom `{text}`"))
}

pub fn parse_atom_text(text: &str) -> (String, Vec<Term>) {
    let text = text.trim();
    match text.find('(') {
        None => (text.to_string(), Vec::new()),
        Some(i) => {
            let pred = text[..i].to_string();
            let inner = text[i + 1..].trim_end_matches(')');
            let args = inner
                .split(',')
                .map(|a| {
                    let a = a.trim();
                    match a.parse::<i64>() {
                        Ok(n) => Term::Num(n),
                        Err(_) => Term::Const(a.to_string()),
                    }
                })
                .collect();
            (pred, args)
        }
    }
}

/// 4-neighborhood adjacency facts for an `n` x `n` grid.
pub fn next_to_facts(pred: &str, n: i64) -> String {
    let mut out = String::new();
    for x in 0..n {
        for y in 0..n {
            for (dx, dy) in [(0_i64, 1_i64), (0, -1), (1, 0), (-1, 0)] {
                let (nx, ny) = (x + dx, y + dy);
                if nx >= 0 && nx < n && ny >= 0 && ny < n {
                    out.push_str(&format!("  {pred}({x}, {y}, {nx}, {ny}).\n"));
                }
            }
        }
    }
    out
}

/// Chebyshev-distance-1 proximity facts (includes the cell itself).
pub fn close_facts(pred: &str, n: i64) -> String {
    let mut out = String::new();
    for x in 0..n {
        for y in 0..n {
            for dx in -1..=1_i64 {
                for dy in -1..=1_i64 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx >= 0 && nx < n && ny >= 0 && ny < n {
                        out.push_str(&format!("  {pred}({x}, {y}, {nx}, {ny}).\n"));
                    }
                }
            }
        }
    }
    out
}

/// Single-resolution grid fixture: one robot, tag-able items, a defined
/// reachability fluent, 4x4 grid.
pub fn grid_domain() -> DomainDescription {
    let mut src = String::from(
        "sorts
  robot = {aha}.
  item = {a1, a2, a3}.
  x_val = 0..3.
  y_val = 0..3.

predicates
  inertial loc(robot, x_val, y_val).
  inertial item_loc(item, x_val, y_val).
  inertial tagged(item).
  defined reachable(item).
  action move(robot, x_val, y_val).
  action tag(robot, item).
  action noop(robot).
  static next_to(x_val, y_val, x_val, y_val).
  static close(x_val, y_val, x_val, y_val).

rules
  move(R, X2, Y2) causes loc(R, X2, Y2).
  move(R, X2, Y2) causes -loc(R, X1, Y1) if loc(R, X1, Y1), X1 != X2.
  move(R, X2, Y2) causes -loc(R, X1, Y1) if loc(R, X1, Y1), Y1 != Y2.
  impossible move(R, X2, Y2) if loc(R, X1, Y1), not next_to(X1, Y1, X2, Y2).
  tag(R, A) causes tagged(A).
  impossible tag(R, A) if not reachable(A).
  reachable(A) if loc(R, X1, Y1), item_loc(A, X2, Y2), close(X1, Y1, X2, Y2), not tagged(A).
  goal tagged(A) if reachable(A).
  goal loc(aha, 1, 0).
  cost move(R, X, Y) = 1.
  cost tag(R, A) = 1.
  cost noop(R) = 1.
",
    );
    src.push_str(&next_to_facts("next_to", 4));
    src.push_str(&close_facts("close", 4));
    parse_domain(&src).expect("grid fixture parses")
}

/// Two-resolution fixture: 4x4 grid split into four 2x2 regions, with
/// bridge axioms and coarse movement. `blocked` removes all fine adjacency
/// into the north-east region so refinement there must fail.
pub fn two_res_domain(blocked: bool) -> DomainDescription {
    let mut src = String::from(
        "sorts
  robot = {aha}.
  x_val = 0..3.
  y_val = 0..3.
  region = {rg_0_0, rg_1_0, rg_0_1, rg_1_1}.

predicates
  inertial loc(robot, x_val, y_val).
  action move(robot, x_val, y_val).
  action noop(robot).
  static next_to(x_val, y_val, x_val, y_val).
  static component(x_val, y_val, region).
  coarse inertial loc*(robot, region).
  coarse action move*(robot, region).
  coarse action noop*(robot).
  coarse static next_to*(region, region).

rules
  move(R, X2, Y2) causes loc(R, X2, Y2).
  move(R, X2, Y2) causes -loc(R, X1, Y1) if loc(R, X1, Y1), X1 != X2.
  move(R, X2, Y2) causes -loc(R, X1, Y1) if loc(R, X1, Y1), Y1 != Y2.
  impossible move(R, X2, Y2) if loc(R, X1, Y1), not next_to(X1, Y1, X2, Y2).
  move*(R, Rg2) causes loc*(R, Rg2).
  move*(R, Rg2) causes -loc*(R, Rg1) if loc*(R, Rg1), Rg1 != Rg2.
  impossible move*(R, Rg2) if loc*(R, Rg1), not next_to*(Rg1, Rg2).
  loc*(R, Rg) if loc(R, X, Y), component(X, Y, Rg).
  goal loc*(aha, rg_1_1).
  cost move(R, X, Y) = 1.
  cost noop(R) = 1.
  cost move*(R, Rg) = 2.
  cost noop*(R) = 1.
",
    );
    // Region adjacency (2x2 region grid, 4-neighborhood).
    let regions = [("rg_0_0", 0, 0), ("rg_1_0", 1, 0), ("rg_0_1", 0, 1), ("rg_1_1", 1, 1)];
    for (a, ax, ay) in regions {
        for (b, bx, by) in regions {
            if (ax - bx as i64).abs() + (ay - by as i64).abs() == 1 {
                src.push_str(&format!("  next_to*({a}, {b}).\n"));
            }
        }
    }
    // Fine adjacency, optionally blocking every edge into rg_1_1 cells.
    let in_blocked = |x: i64, y: i64| blocked && x >= 2 && y >= 2;
    for x in 0..4_i64 {
        for y in 0..4_i64 {
            for (dx, dy) in [(0_i64, 1_i64), (0, -1), (1, 0), (-1, 0)] {
                let (nx, ny) = (x + dx, y + dy);
                if nx >= 0 && nx < 4 && ny >= 0 && ny < 4 && !in_blocked(nx, ny) && !in_blocked(x, y) {
                    src.push_str(&format!("  next_to({x}, {y}, {nx}, {ny}).\n"));
                }
            }
        }
    }
    src.push_str(
        "
resolutions
  region rg_0_0 = (0..1, 0..1).
  region rg_1_0 = (2..3, 0..1).
  region rg_0_1 = (0..1, 2..3).
  region rg_1_1 = (2..3, 2..3).
",
    );
    parse_domain(&src).expect("two-resolution fixture parses")
}

/// Build a closed fine belief for the grid fixtures from `atom -> truth`
/// pairs; everything else false.
pub fn belief_from(th: &GroundTheory, res: Resolution, assignments: &[(&str, bool)]) -> BeliefState {
    let t = match res {
        Resolution::Fine => &th.fine,
        Resolution::Coarse => &th.coarse,
    };
    let mut inertial = vec![Truth::False; t.n_inertial as usize];
    for (text, value) in assignments {
        let id = atom(th, text);
        let slot = th.atoms.slot(id);
        assert_eq!(slot.res, res);
        inertial[slot.idx as usize] = Truth::from_bool(*value);
    }
    kat::reasoner::close(th, res, 0, inertial).expect("consistent fixture belief")
}

// ---------------------------------------------------------------------
// Independent oracles
// ---------------------------------------------------------------------

/// Exhaustive enumeration of executable action sequences up to `horizon`;
/// returns the best (cost, length, ordinal sequence) and its plan.
pub fn enumerate_best_plan(
    th: &GroundTheory,
    s: &BeliefState,
    goal: &GoalTest,
    horizon: u32,
) -> Option<Plan> {
    struct Best {
        key: (u64, usize, Vec<u32>),
        actions: Vec<AtomId>,
    }
    fn goal_holds(th: &GroundTheory, s: &BeliefState, goal: &GoalTest) -> bool {
        // Re-evaluate through the public test surface.
        match goal {
            GoalTest::Direct(lits) => lits.iter().all(|l| match l {
                kat::reasoner::GoalLit::Inertial { slot, value } => {
                    s.inertial_truth(*slot) == Truth::from_bool(*value)
                }
                kat::reasoner::GoalLit::Defined { slot, positive } => {
                    s.defined_holds(*slot) == *positive
                }
            }),
            GoalTest::Bridge(lits) => lits
                .iter()
                .all(|(slot, value)| kat::reasoner::bridge_literal_holds(th, s, *slot, *value)),
        }
    }
    fn recurse(
        th: &GroundTheory,
        s: &BeliefState,
        goal: &GoalTest,
        horizon: u32,
        cost: u64,
        seq: &mut Vec<u32>,
        actions: &mut Vec<AtomId>,
        best: &mut Option<Best>,
    ) {
        if goal_holds(th, s, goal) {
            let key = (cost, seq.len(), seq.clone());
            if best.as_ref().map(|b| key < b.key).unwrap_or(true) {
                *best = Some(Best { key, actions: actions.clone() });
            }
            // A satisfied goal still allows longer plans, but they can
            // never beat this prefix; stop here.
            return;
        }
        if seq.len() as u32 >= horizon {
            return;
        }
        let t = match s.res {
            Resolution::Fine => &th.fine,
            Resolution::Coarse => &th.coarse,
        };
        for (ordinal, &action) in t.actions.iter().enumerate() {
            match transition(th, s.res, s, action).expect("oracle domains never error") {
                TransitionOutcome::Inexecutable => continue,
                TransitionOutcome::State(next) => {
                    seq.push(ordinal as u32);
                    actions.push(action);
                    recurse(th, &next, goal, horizon, cost + th.action_cost(action) as u64, seq, actions, best);
                    seq.pop();
                    actions.pop();
                }
            }
        }
    }
    let mut best = None;
    recurse(th, s, goal, horizon, 0, &mut Vec::new(), &mut Vec::new(), &mut best);
    best.map(|b| Plan { actions: b.actions, total_cost: b.key.0 })
}

/// Brute-force minimal CR subset: smallest (then lexicographically first)
/// set of CR rule indices whose application yields a consistent completion.
pub fn brute_force_min_crs(
    th: &GroundTheory,
    res: Resolution,
    obs: &[(AtomId, bool)],
) -> Option<Vec<usize>> {
    let t = match res {
        Resolution::Fine => &th.fine,
        Resolution::Coarse => &th.coarse,
    };
    let n = t.crs.len();
    let mut subsets: Vec<Vec<usize>> = (0..(1u32 << n))
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
        .collect();
    subsets.sort_by(|a, b| (a.len(), a.clone()).cmp(&(b.len(), b.clone())));
    for subset in subsets {
        if candidate_consistent(th, res, obs, &subset) {
            return Some(subset);
        }
    }
    None
}

fn candidate_consistent(th: &GroundTheory, res: Resolution, obs: &[(AtomId, bool)], crs: &[usize]) -> bool {
    let t = match res {
        Resolution::Fine => &th.fine,
        Resolution::Coarse => &th.coarse,
    };
    let mut inertial = vec![Truth::Unknown; t.n_inertial as usize];
    for (a, v) in obs {
        let slot = th.atoms.slot(*a);
        inertial[slot.idx as usize] = Truth::from_bool(*v);
    }
    let mut retracted = vec![false; t.defaults.len()];
    for &ci in crs {
        let d = &t.defaults[t.crs[ci].default_idx];
        retracted[t.crs[ci].default_idx] = true;
        let v = Truth::from_bool(!d.head_value);
        let cur = inertial[d.head_slot as usize];
        if cur != Truth::Unknown && cur != v {
            return false;
        }
        inertial[d.head_slot as usize] = v;
    }
    for (di, d) in t.defaults.iter().enumerate() {
        if retracted[di] {
            continue;
        }
        let v = Truth::from_bool(d.head_value);
        let cur = inertial[d.head_slot as usize];
        if cur != Truth::Unknown && cur != v {
            return false;
        }
        inertial[d.head_slot as usize] = v;
    }
    kat::reasoner::close(th, res, 0, inertial).is_ok()
}

// ---------------------------------------------------------------------
// Random instance generator (planner-oracle and soundness suites)
// ---------------------------------------------------------------------

pub struct RandomInstance {
    pub theory: GroundTheory,
    pub init: BeliefState,
    pub goal: GoalTest,
    pub horizon: u32,
}

/// Random single-resolution domain without integrity constraints; all
/// fluents known in the initial state.
pub fn random_instance(rng: &mut ChaCha8Rng) -> RandomInstance {
    random_instance_opts(rng, false)
}

/// Like [`random_instance`], optionally adding integrity constraints
/// (the soundness suite exercises the violation-checking path; planner
/// oracles avoid them so every transition is total).
pub fn random_instance_opts(rng: &mut ChaCha8Rng, with_constraints: bool) -> RandomInstance {
    let n_obj: usize = rng.random_range(2..=4);
    let n_inertial: usize = rng.random_range(2..=4);
    let n_defined: usize = rng.random_range(0..=2);
    let n_actions: usize = rng.random_range(2..=4);

    let mut src = String::new();
    src.push_str("sorts\n  obj = {");
    for i in 0..n_obj {
        if i > 0 {
            src.push_str(", ");
        }
        src.push_str(&format!("o{i}"));
    }
    src.push_str("}.\n\npredicates\n");
    let mut pred_arity = Vec::new();
    for i in 0..n_inertial {
        let arity: usize = rng.random_range(0..=1);
        pred_arity.push(arity);
        if arity == 0 {
            src.push_str(&format!("  inertial p{i}.\n"));
        } else {
            src.push_str(&format!("  inertial p{i}(obj).\n"));
        }
    }
    let mut def_arity = Vec::new();
    for i in 0..n_defined {
        let arity: usize = rng.random_range(0..=1);
        def_arity.push(arity);
        if arity == 0 {
            src.push_str(&format!("  defined d{i}.\n"));
        } else {
            src.push_str(&format!("  defined d{i}(obj).\n"));
        }
    }
    let mut act_arity = Vec::new();
    for i in 0..n_actions {
        let arity: usize = rng.random_range(0..=1);
        act_arity.push(arity);
        if arity == 0 {
            src.push_str(&format!("  action a{i}.\n"));
        } else {
            src.push_str(&format!("  action a{i}(obj).\n"));
        }
    }
    src.push_str("\nrules\n");

    let var_or_const = |rng: &mut ChaCha8Rng, arity: usize, bound_var: bool| -> String {
        if arity == 0 {
            String::new()
        } else if bound_var {
            "(V)".to_string()
        } else {
            format!("(o{})", rng.random_range(0..n_obj))
        }
    };

    for (ai, &aar) in act_arity.iter().enumerate() {
        let n_laws: usize = rng.random_range(1..=2);
        // One law per (action, head predicate): conflicting direct effects
        // are a domain-authoring error, not something to fuzz.
        let mut used_heads = std::collections::BTreeSet::new();
        for _ in 0..n_laws {
            let hi = rng.random_range(0..n_inertial);
            if !used_heads.insert(hi) {
                continue;
            }
            let sign = if rng.random_bool(0.3) { "-" } else { "" };
            // Heads reuse the action variable when both have arity 1.
            let share = aar == 1 && pred_arity[hi] == 1 && rng.random_bool(0.7);
            let head_args = if pred_arity[hi] == 0 {
                String::new()
            } else if share {
                "(V)".into()
            } else {
                format!("(o{})", rng.random_range(0..n_obj))
            };
            let act_args = var_or_const(rng, aar, aar == 1);
            let mut line = format!("  a{ai}{act_args} causes {sign}p{hi}{head_args}");
            if rng.random_bool(0.4) {
                let bi = rng.random_range(0..n_inertial);
                let bsign = if rng.random_bool(0.3) { "-" } else { "" };
                let bargs = if pred_arity[bi] == 0 {
                    String::new()
                } else {
                    format!("(o{})", rng.random_range(0..n_obj))
                };
                line.push_str(&format!(" if {bsign}p{bi}{bargs}"));
            }
            line.push_str(".\n");
            src.push_str(&line);
        }
        if rng.random_bool(0.6) {
            let bi = rng.random_range(0..n_inertial);
            let neg = if rng.random_bool(0.5) { "not " } else { "" };
            let bargs = if pred_arity[bi] == 0 {
                String::new()
            } else {
                format!("(o{})", rng.random_range(0..n_obj))
            };
            let act_args = var_or_const(rng, aar, aar == 1);
            src.push_str(&format!("  impossible a{ai}{act_args} if {neg}p{bi}{bargs}.\n"));
        }
        if rng.random_bool(0.5) {
            let c = rng.random_range(1..=3);
            let act_args = if aar == 0 { String::new() } else { "(V)".to_string() };
            src.push_str(&format!("  cost a{ai}{act_args} = {c}.\n"));
        }
    }
    if with_constraints && n_inertial >= 2 {
        // A couple of uniqueness-style checks between inertial fluents.
        let n_cons: usize = rng.random_range(1..=2);
        for _ in 0..n_cons {
            let a = rng.random_range(0..n_inertial);
            let mut b = rng.random_range(0..n_inertial);
            if a == b {
                b = (b + 1) % n_inertial;
            }
            let aargs = if pred_arity[a] == 0 { String::new() } else { format!("(o{})", rng.random_range(0..n_obj)) };
            let bargs = if pred_arity[b] == 0 { String::new() } else { format!("(o{})", rng.random_range(0..n_obj)) };
            src.push_str(&format!("  -p{a}{aargs} if p{b}{bargs}.
"));
        }
    }
    for (di, &dar) in def_arity.iter().enumerate() {
        let bi = rng.random_range(0..n_inertial);
        let share = dar == 1 && pred_arity[bi] == 1;
        let head_args = if dar == 0 { String::new() } else { "(V)".into() };
        let body_args = if pred_arity[bi] == 0 {
            String::new()
        } else if share {
            "(V)".into()
        } else {
            format!("(o{})", rng.random_range(0..n_obj))
        };
        src.push_str(&format!("  d{di}{head_args} if p{bi}{body_args}.\n"));
        if dar == 1 && rng.random_bool(0.5) {
            // An unconditionally false variant never fires; keeps ordering noisy.
            let bi2 = rng.random_range(0..n_inertial);
            let body2 = if pred_arity[bi2] == 0 {
                String::new()
            } else {
                format!("(o{})", rng.random_range(0..n_obj))
            };
            src.push_str(&format!("  d{di}(V) if p{bi2}{body2}, not p{bi2}{body2}.\n"));
        }
    }

    let d = parse_domain(&src).unwrap_or_else(|e| panic!("random domain invalid: {e}\n{src}"));
    let theory = ground(&d).expect("random domain grounds");

    let n_slots = theory.fine.n_inertial as usize;
    let init = loop {
        let mut inertial = Vec::with_capacity(n_slots);
        for _ in 0..n_slots {
            inertial.push(if rng.random_bool(0.5) { Truth::True } else { Truth::False });
        }
        match kat::reasoner::close(&theory, Resolution::Fine, 0, inertial) {
            Ok(b) => break b,
            Err(_) if with_constraints => continue,
            Err(e) => panic!("constraint-free domain failed to close: {e}"),
        }
    };

    // Goal: 1-2 inertial literals.
    let n_goal: usize = rng.random_range(1..=2);
    let mut lits = Vec::new();
    for _ in 0..n_goal {
        let slot = rng.random_range(0..theory.fine.n_inertial);
        let value = rng.random_bool(0.5);
        lits.push(kat::reasoner::GoalLit::Inertial { slot, value });
    }
    let horizon: u32 = rng.random_range(1..=4);
    RandomInstance { theory, init, goal: GoalTest::Direct(lits), horizon }
}

/// Apply a plan through the transition function, asserting executability
/// and constraint satisfaction along the way; returns the final state.
pub fn replay(th: &GroundTheory, s: &BeliefState, plan: &Plan) -> Result<BeliefState, ReasonError> {
    let mut cur = s.clone();
    for &a in &plan.actions {
        match transition(th, cur.res, &cur, a)? {
            TransitionOutcome::State(next) => cur = next,
            TransitionOutcome::Inexecutable => {
                panic!("plan replay hit an inexecutable action: {}", th.atoms.display(a))
            }
        }
    }
    Ok(cur)
}
