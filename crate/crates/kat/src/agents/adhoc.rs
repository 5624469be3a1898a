//! The knowledge-driven ad hoc guard: sense, score and select behavior
//! models, predict the other agents, reason to a plan at two resolutions,
//! actuate one environment action, and decide whether to message a
//! teammate about a hidden attacker.

use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::fftree::{featurize, learn_ensemble, FFEnsemble, FeatureVector};
use crate::fortattack::{
    apply_action, in_shooting_range, infer_action, Action, AgentState, AgentView, Observation,
    ScenarioConfig, Team, ADHOC_ID, NO_ACTION_ID, N_AGENTS,
};
use crate::modelsel::{Actual, ModelScoreboard, PenaltyMode, PenaltyRecord, Predicted};
use crate::reasoner::{
    abstract_to_coarse, complete_initial_state, monitor, plan_goal, refine, select_goal, transition,
    AtomId, BeliefState, GroundTheory, MonitorOutcome, PlanOptions, PlanOutcome, RefineError,
    TransitionOutcome,
};
use crate::rulelang::{Resolution, Term};

use super::domain_gen::agent_const;
use super::Message;

/// Model-selection regime for the experiment ablations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMode {
    /// Pin model 0; no scoring, revision, or novelty learning.
    Off,
    /// Algorithm-driven selection with the given penalty regime.
    On(PenaltyMode),
}

#[derive(Debug, Clone)]
pub struct ControllerConfig {
    pub coarse_horizon: u32,
    pub fine_horizon: u32,
    pub revise_every: u32,
    pub min_revise_rows: usize,
    pub novelty_threshold: f64,
    pub novelty_streak: u32,
    pub min_learn_rows: usize,
    pub buffer_capacity: usize,
    pub max_levels: usize,
    pub comm_enabled: bool,
    pub selection: SelectionMode,
    /// Online revision and novelty learning (off in the static-model ablations).
    pub revision_enabled: bool,
    /// Attackers count as clustered when their pairwise spread stays under
    /// this for `cluster_steps` consecutive steps.
    pub cluster_spread: f64,
    pub cluster_steps: usize,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            coarse_horizon: crate::reasoner::DEFAULT_COARSE_HORIZON,
            fine_horizon: crate::reasoner::DEFAULT_FINE_HORIZON,
            revise_every: 10,
            min_revise_rows: 20,
            novelty_threshold: crate::modelsel::DEFAULT_NOVELTY_THRESHOLD,
            novelty_streak: crate::modelsel::DEFAULT_NOVELTY_STREAK,
            min_learn_rows: 50,
            buffer_capacity: 500,
            max_levels: 10,
            comm_enabled: false,
            selection: SelectionMode::On(PenaltyMode::Graded),
            revision_enabled: true,
            cluster_spread: 0.30,
            cluster_steps: 5,
        }
    }
}

/// Per-step diagnostics for the episode log.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct StepTrace {
    pub step: u32,
    pub selected: Vec<(usize, usize)>,
    /// (agent, model, score) triples after this round's update.
    pub scores: Vec<(usize, usize, f64)>,
    pub penalties: Vec<PenaltyRecord>,
    /// Selected-model action predictions for the next step, per live agent.
    pub predicted: Vec<(usize, u8)>,
    pub replanned: bool,
    pub noplan_fallback: bool,
    pub goal: Option<String>,
    pub plan_len: usize,
    pub novelty: Vec<usize>,
    pub crs_applied: usize,
    pub message_sent: bool,
    pub internal_error: Option<String>,
}

enum MacroExec {
    Move { cell: (i64, i64) },
    Aim { attacker: usize, patience: u32 },
}

struct AtomMaps {
    loc: Vec<AtomId>,
    agent_loc: Vec<Vec<AtomId>>,
    shot: Vec<AtomId>,
    spread: Vec<AtomId>,
}

impl AtomMaps {
    fn build(th: &GroundTheory, n: i64) -> AtomMaps {
        let cell_atoms = |pred: &str, who: &str| -> Vec<AtomId> {
            let mut v = Vec::with_capacity((n * n) as usize);
            for x in 0..n {
                for y in 0..n {
                    v.push(
                        th.atoms
                            .lookup(pred, &[Term::Const(who.into()), Term::Num(x), Term::Num(y)])
                            .expect("domain covers the grid"),
                    );
                }
            }
            v
        };
        AtomMaps {
            loc: cell_atoms("loc", "aha"),
            agent_loc: (1..N_AGENTS).map(|id| cell_atoms("agent_loc", agent_const(id))).collect(),
            shot: (1..N_AGENTS)
                .map(|id| th.atoms.lookup("shot", &[Term::Const(agent_const(id).into())]).unwrap())
                .collect(),
            spread: (3..N_AGENTS)
                .map(|id| {
                    th.atoms
                        .lookup("spread_attack", &[Term::Const(agent_const(id).into())])
                        .unwrap()
                })
                .collect(),
        }
    }

    fn cell_idx(&self, n: i64, cell: (i64, i64)) -> usize {
        (cell.0 * n + cell.1) as usize
    }
}

pub struct AdHocController {
    pub theory: Arc<GroundTheory>,
    scenario: ScenarioConfig,
    pub cfg: ControllerConfig,
    /// Candidate ensembles per external agent (index 0 = agent id 1).
    libraries: Vec<Vec<FFEnsemble>>,
    scoreboard: ModelScoreboard,
    buffers: Vec<VecDeque<(FeatureVector, u8)>>,
    last_views: Vec<AgentView>,
    prev_views: Option<Vec<AgentView>>,
    /// Inferred previous action per agent (feature input).
    prev_inferred: [u8; N_AGENTS],
    predictions: Option<Vec<Vec<Option<Predicted>>>>,
    plan_queue: VecDeque<AtomId>,
    current_macro: Option<MacroExec>,
    expected: Option<BeliefState>,
    goal_priority: Option<usize>,
    spread_window: VecDeque<f64>,
    steps_since_revise: u32,
    cooldown_left: u32,
    maps: AtomMaps,
    pub last_trace: StepTrace,
}

impl AdHocController {
    /// `guard_models` and `attacker_models` are the role libraries; each
    /// external agent starts with its own copies.
    pub fn new(
        theory: Arc<GroundTheory>,
        scenario: ScenarioConfig,
        cfg: ControllerConfig,
        guard_models: Vec<FFEnsemble>,
        attacker_models: Vec<FFEnsemble>,
    ) -> AdHocController {
        assert!(!guard_models.is_empty() && !attacker_models.is_empty(), "model library must be non-empty");
        let libraries: Vec<Vec<FFEnsemble>> = (1..N_AGENTS)
            .map(|id| if id < 3 { guard_models.clone() } else { attacker_models.clone() })
            .collect();
        let n_models = libraries.iter().map(|l| l.len()).max().unwrap();
        let mode = match cfg.selection {
            SelectionMode::On(m) => m,
            SelectionMode::Off => PenaltyMode::Graded,
        };
        let maps = AtomMaps::build(&theory, scenario.grid_n as i64);
        AdHocController {
            theory,
            scenario: scenario.clone(),
            cfg,
            libraries,
            scoreboard: ModelScoreboard::new(N_AGENTS - 1, n_models, mode),
            buffers: (1..N_AGENTS).map(|_| VecDeque::new()).collect(),
            last_views: Vec::new(),
            prev_views: None,
            prev_inferred: [NO_ACTION_ID; N_AGENTS],
            predictions: None,
            plan_queue: VecDeque::new(),
            current_macro: None,
            expected: None,
            goal_priority: None,
            spread_window: VecDeque::new(),
            steps_since_revise: 0,
            cooldown_left: 0,
            maps,
            last_trace: StepTrace::default(),
        }
    }

    pub fn selected_models(&self) -> Vec<usize> {
        (0..N_AGENTS - 1)
            .map(|i| match self.cfg.selection {
                SelectionMode::Off => 0,
                SelectionMode::On(_) => self.scoreboard.select_model(i),
            })
            .collect()
    }

    /// One control step. Infallible: internal reasoner errors degrade to a
    /// flagged noop and are recorded in the trace.
    pub fn act(&mut self, obs: &Observation) -> (Action, Option<Message>) {
        let mut trace = StepTrace { step: obs.step, ..Default::default() };

        // (1) Merge the observation into the last-seen view table.
        if self.last_views.is_empty() {
            // First observation must cover everyone (full view at step 0).
            let mut views = obs.visible.clone();
            views.sort_by_key(|v| v.id);
            self.last_views = views;
        } else {
            for v in &obs.visible {
                self.last_views[v.id] = v.clone();
            }
            for hid in &obs.hidden {
                // Stale pose, but a hidden agent is not known dead.
                let _ = hid;
            }
        }
        let views = self.last_views.clone();

        // (2) Infer what every external agent just did; feed buffers and
        // score last round's predictions.
        let mut inferred_now = self.prev_inferred;
        if let Some(prev) = self.prev_views.clone() {
            let died: Vec<AgentView> = prev
                .iter()
                .filter(|p| p.alive && !views[p.id].alive)
                .map(|p| views[p.id].clone())
                .collect();
            let mut actual: Vec<Option<Actual>> = vec![None; N_AGENTS - 1];
            for id in 1..N_AGENTS {
                if !prev[id].alive {
                    continue;
                }
                let opponents_died: Vec<&AgentView> =
                    died.iter().filter(|d| d.team != prev[id].team).collect();
                let act = infer_action(&prev[id], &views[id], &opponents_died, &self.scenario);
                if let Ok(f) = featurize(&prev, &obs.fort, id, self.prev_inferred[id]) {
                    let buf = &mut self.buffers[id - 1];
                    if buf.len() >= self.cfg.buffer_capacity {
                        buf.pop_front();
                    }
                    buf.push_back((f, act.id()));
                }
                inferred_now[id] = act.id();
                actual[id - 1] = Some(Actual { action: act.id(), pose: views[id].pose });
            }
            if let (SelectionMode::On(_), Some(preds)) = (self.cfg.selection, &self.predictions) {
                trace.penalties = self.scoreboard.update(&actual, preds);
                if self.cfg.revision_enabled {
                    for id in 1..N_AGENTS {
                        if !views[id].alive {
                            continue;
                        }
                        if self.scoreboard.novelty_trigger(
                            id - 1,
                            self.cfg.novelty_threshold,
                            self.cfg.novelty_streak,
                        ) && self.buffers[id - 1].len() >= self.cfg.min_learn_rows
                        {
                            let rows: Vec<(FeatureVector, u8)> =
                                self.buffers[id - 1].iter().cloned().collect();
                            let role = if id < 3 { "guard" } else { "attacker" };
                            let fresh = learn_ensemble(&rows, role, self.cfg.max_levels);
                            self.libraries[id - 1].push(fresh);
                            self.scoreboard.add_model(id - 1);
                            trace.novelty.push(id);
                        }
                    }
                }
            }
        }

        // (3) Periodic revision of each agent's selected model.
        self.steps_since_revise += 1;
        if matches!(self.cfg.selection, SelectionMode::On(_))
            && self.cfg.revision_enabled
            && self.steps_since_revise >= self.cfg.revise_every
        {
            self.steps_since_revise = 0;
            for id in 1..N_AGENTS {
                if !views[id].alive {
                    continue;
                }
                let sel = self.scoreboard.select_model(id - 1);
                let rows: Vec<(FeatureVector, u8)> = self.buffers[id - 1].iter().cloned().collect();
                self.libraries[id - 1][sel] =
                    self.libraries[id - 1][sel].revise(&rows, self.cfg.min_revise_rows);
            }
        }

        // (4) Select models and predict everyone's next action and pose.
        let selected = self.selected_models();
        trace.selected = (1..N_AGENTS).map(|id| (id, selected[id - 1])).collect();
        for id in 1..N_AGENTS {
            for m in 0..self.scoreboard.n_models(id - 1) {
                trace.scores.push((id, m, self.scoreboard.score(id - 1, m)));
            }
        }
        let mut predictions: Vec<Vec<Option<Predicted>>> = Vec::with_capacity(N_AGENTS - 1);
        for id in 1..N_AGENTS {
            let mut per_model = Vec::with_capacity(self.libraries[id - 1].len());
            if views[id].alive {
                let f = featurize(&views, &obs.fort, id, inferred_now[id]).ok();
                for model in &self.libraries[id - 1] {
                    per_model.push(f.as_ref().map(|f| {
                        let action = model.predict(f);
                        let pose = Action::from_id(action)
                            .map(|a| apply_action(&views[id].pose, a, &self.scenario))
                            .unwrap_or(views[id].pose);
                        Predicted { action, pose }
                    }));
                }
            } else {
                per_model.resize(self.libraries[id - 1].len(), None);
            }
            predictions.push(per_model);
        }
        for id in 1..N_AGENTS {
            if views[id].alive {
                if let Some(Some(p)) = predictions[id - 1].get(selected[id - 1]) {
                    trace.predicted.push((id, p.action));
                }
            }
        }

        // (5) Belief over the symbolic grid. The planning belief carries the
        // predicted next cells of the external agents (window of one).
        let clustered = self.update_cluster_watch(&views);
        let observed_lits = self.belief_literals(&views, None, clustered);
        let predicted_cells: Vec<Option<(i64, i64)>> = (1..N_AGENTS)
            .map(|id| {
                if !views[id].alive {
                    return None;
                }
                predictions[id - 1]
                    .get(selected[id - 1])
                    .and_then(|p| *p)
                    .map(|p| self.scenario.cell_of(p.pose.x, p.pose.y))
            })
            .collect();
        let planning_lits = self.belief_literals(&views, Some(&predicted_cells), clustered);

        let completion = match complete_initial_state(&self.theory, Resolution::Fine, &planning_lits) {
            Ok(c) => c,
            Err(e) => {
                trace.internal_error = Some(e.to_string());
                trace.noplan_fallback = true;
                self.finish_step(views, inferred_now, predictions, trace);
                return (Action::Noop, None);
            }
        };
        trace.crs_applied = completion.applied_crs.len();
        let belief = completion.belief;

        // (6) Reality check against the previous expectation.
        let mut replan = self.plan_queue.is_empty() && self.current_macro.is_none();
        if let Some(expected) = &self.expected {
            if let MonitorOutcome::ReplanNeeded(_) = monitor(&self.theory, expected, &observed_lits) {
                replan = true;
            }
        }

        // A higher-priority goal becoming available also forces a replan.
        let coarse_now = abstract_to_coarse(&self.theory, &belief).ok();
        if let (Some(cb), Some(cur)) = (&coarse_now, self.goal_priority) {
            if let Some(g) = select_goal(&self.theory, cb) {
                if g.priority < cur {
                    replan = true;
                }
            }
        }

        // (7) Macro progress: a completed leg advances the plan.
        self.advance_macro(&views);
        if self.plan_queue.is_empty() && self.current_macro.is_none() {
            replan = true;
        }

        if replan {
            trace.replanned = true;
            self.plan_queue.clear();
            self.current_macro = None;
            self.goal_priority = None;
            match self.replan(&belief, coarse_now.as_ref(), &mut trace) {
                Ok(()) => {}
                Err(e) => {
                    trace.internal_error = Some(e);
                    trace.noplan_fallback = true;
                }
            }
        }
        trace.plan_len = self.plan_queue.len();

        // (8) Actuate one environment action from the current symbolic step.
        self.cooldown_left = self.cooldown_left.saturating_sub(1);
        let action = self.actuate(&views, &belief, &predictions, &selected, &mut trace);
        if action == Action::Shoot {
            self.cooldown_left = self.scenario.shot_cooldown + 1;
        }

        // (9) Communication decision.
        let message = if self.cfg.comm_enabled { self.decide_communicate(&views, &belief, obs) } else { None };
        trace.message_sent = message.is_some();

        self.expected = Some(belief);
        self.finish_step(views, inferred_now, predictions, trace);
        (action, message)
    }

    fn finish_step(
        &mut self,
        views: Vec<AgentView>,
        inferred: [u8; N_AGENTS],
        predictions: Vec<Vec<Option<Predicted>>>,
        trace: StepTrace,
    ) {
        self.prev_views = Some(views);
        self.prev_inferred = inferred;
        self.predictions = Some(predictions);
        self.last_trace = trace;
    }

    /// Attacker spread watcher: sustained clustering retracts the
    /// spread-attack defaults through observations.
    fn update_cluster_watch(&mut self, views: &[AgentView]) -> bool {
        let live: Vec<&AgentView> = views.iter().filter(|v| v.team == Team::Attacker && v.alive).collect();
        let spread = if live.len() < 2 {
            f64::INFINITY
        } else {
            let mut max_d: f64 = 0.0;
            for i in 0..live.len() {
                for j in i + 1..live.len() {
                    let d = live[i].pose.distance(&live[j].pose);
                    max_d = max_d.max(d);
                }
            }
            max_d
        };
        if self.spread_window.len() >= self.cfg.cluster_steps {
            self.spread_window.pop_front();
        }
        self.spread_window.push_back(spread);
        self.spread_window.len() >= self.cfg.cluster_steps
            && self.spread_window.iter().all(|d| *d < self.cfg.cluster_spread)
    }

    /// Ground literal assignment for the fine belief: the ad hoc cell, the
    /// external agents' cells (observed or predicted), liveness, and the
    /// clustering evidence against the spread defaults.
    fn belief_literals(
        &self,
        views: &[AgentView],
        predicted_cells: Option<&[Option<(i64, i64)>]>,
        clustered: bool,
    ) -> Vec<(AtomId, bool)> {
        let n = self.scenario.grid_n as i64;
        let mut lits = Vec::with_capacity((N_AGENTS) * (n * n) as usize);
        let me = &views[ADHOC_ID];
        let my_cell = self.scenario.cell_of(me.pose.x, me.pose.y);
        for x in 0..n {
            for y in 0..n {
                let idx = self.maps.cell_idx(n, (x, y));
                lits.push((self.maps.loc[idx], (x, y) == my_cell));
            }
        }
        for id in 1..N_AGENTS {
            let v = &views[id];
            let cell = if v.alive {
                match predicted_cells {
                    Some(cells) => cells[id - 1],
                    None => Some(self.scenario.cell_of(v.pose.x, v.pose.y)),
                }
            } else {
                None
            };
            for x in 0..n {
                for y in 0..n {
                    let idx = self.maps.cell_idx(n, (x, y));
                    lits.push((self.maps.agent_loc[id - 1][idx], Some((x, y)) == cell));
                }
            }
            lits.push((self.maps.shot[id - 1], !v.alive));
        }
        if clustered {
            for id in 3..N_AGENTS {
                if views[id].alive {
                    lits.push((self.maps.spread[id - 3], false));
                }
            }
        }
        lits
    }

    fn replan(
        &mut self,
        belief: &BeliefState,
        coarse: Option<&BeliefState>,
        trace: &mut StepTrace,
    ) -> Result<(), String> {
        let coarse_belief = match coarse {
            Some(c) => c.clone(),
            None => abstract_to_coarse(&self.theory, belief).map_err(|e| e.to_string())?,
        };
        let Some(goal) = select_goal(&self.theory, &coarse_belief) else {
            trace.noplan_fallback = true;
            return Ok(());
        };
        trace.goal = Some(goal.text.clone());
        let mut banned: Vec<AtomId> = Vec::new();
        for _attempt in 0..4 {
            let opts = PlanOptions { allowed_actions: None, banned_actions: banned.clone() };
            let coarse_plan = match plan_goal(
                &self.theory,
                &coarse_belief,
                &goal,
                self.cfg.coarse_horizon,
                &opts,
            )
            .map_err(|e| e.to_string())?
            {
                PlanOutcome::Plan(p) => p,
                PlanOutcome::NoPlan => {
                    trace.noplan_fallback = true;
                    return Ok(());
                }
            };
            match refine(&self.theory, &coarse_plan, belief, self.cfg.fine_horizon) {
                Ok(fine) => {
                    self.goal_priority = Some(goal.priority);
                    self.plan_queue = fine.actions.into();
                    return Ok(());
                }
                Err(RefineError::Failure(f)) => {
                    banned.push(f.coarse_action);
                    continue;
                }
                Err(RefineError::Domain(e)) => return Err(e.to_string()),
            }
        }
        trace.noplan_fallback = true;
        Ok(())
    }

    /// Pop finished macros (a reached move target) and set up the next one.
    fn advance_macro(&mut self, views: &[AgentView]) {
        let me = &views[ADHOC_ID];
        if let Some(MacroExec::Move { cell }) = &self.current_macro {
            if self.scenario.cell_of(me.pose.x, me.pose.y) == *cell {
                self.current_macro = None;
            }
        }
        if let Some(MacroExec::Aim { attacker, .. }) = &self.current_macro {
            if !views[*attacker].alive {
                self.current_macro = None;
            }
        }
    }

    /// Execute the current symbolic action as one environment action.
    fn actuate(
        &mut self,
        views: &[AgentView],
        belief: &BeliefState,
        predictions: &[Vec<Option<Predicted>>],
        selected: &[usize],
        trace: &mut StepTrace,
    ) -> Action {
        let me = &views[ADHOC_ID];
        loop {
            if self.current_macro.is_none() {
                let Some(&next) = self.plan_queue.front() else {
                    return Action::Noop;
                };
                // Emission-time executability check.
                match transition(&self.theory, Resolution::Fine, belief, next) {
                    Ok(TransitionOutcome::State(_)) => {}
                    Ok(TransitionOutcome::Inexecutable) | Err(_) => {
                        self.plan_queue.clear();
                        trace.noplan_fallback = true;
                        return Action::Noop;
                    }
                }
                self.plan_queue.pop_front();
                let info = self.theory.atoms.pred_info(next);
                let args = self.theory.atoms.args(next);
                self.current_macro = match info.name.as_str() {
                    "move" => {
                        if let [_, Term::Num(x), Term::Num(y)] = args {
                            Some(MacroExec::Move { cell: (*x, *y) })
                        } else {
                            None
                        }
                    }
                    "shoot" => {
                        if let [_, Term::Const(c)] = args {
                            let attacker = super::domain_gen::AGENT_CONSTS
                                .iter()
                                .position(|a| a == c)
                                .unwrap_or(3);
                            Some(MacroExec::Aim { attacker, patience: 8 })
                        } else {
                            None
                        }
                    }
                    _ => None, // symbolic noop
                };
                if self.current_macro.is_none() {
                    return Action::Noop;
                }
            }

            match self.current_macro.take() {
                Some(MacroExec::Move { cell }) => {
                    let (tx, ty) = self.scenario.cell_center(cell.0, cell.1);
                    if self.scenario.cell_of(me.pose.x, me.pose.y) == cell {
                        // Already there; advance to the next symbolic action.
                        continue;
                    }
                    self.current_macro = Some(MacroExec::Move { cell });
                    let dx = tx - me.pose.x;
                    let dy = ty - me.pose.y;
                    return if dx.abs() >= dy.abs() {
                        if dx >= 0.0 {
                            Action::MoveEast
                        } else {
                            Action::MoveWest
                        }
                    } else if dy >= 0.0 {
                        Action::MoveNorth
                    } else {
                        Action::MoveSouth
                    };
                }
                Some(MacroExec::Aim { attacker, patience }) => {
                    if !views[attacker].alive {
                        continue; // died on its own; next symbolic action
                    }
                    // Aim at where the attacker is predicted to be after
                    // this simultaneous step.
                    let predicted_pose = predictions[attacker - 1]
                        .get(selected[attacker - 1])
                        .and_then(|p| *p)
                        .map(|p| p.pose)
                        .unwrap_or(views[attacker].pose);
                    let shooter = AgentState {
                        id: ADHOC_ID,
                        team: Team::Guard,
                        pose: me.pose,
                        alive: true,
                        last_action: None,
                    };
                    let target = AgentState {
                        id: attacker,
                        team: Team::Attacker,
                        pose: predicted_pose,
                        alive: true,
                        last_action: None,
                    };
                    if in_shooting_range(&shooter, &target, &self.scenario) && self.cooldown_left == 0 {
                        // Fire; the symbolic shot completes now.
                        return Action::Shoot;
                    }
                    if self.cooldown_left > 0 {
                        // Track the target while the gun recharges.
                        self.current_macro = Some(MacroExec::Aim { attacker, patience });
                        let diff = crate::fortattack::wrap_angle(
                            me.pose.bearing_to(predicted_pose.x, predicted_pose.y) - me.pose.orientation,
                        );
                        return if diff.abs() < self.scenario.shoot_halfwidth * 0.5 {
                            Action::Noop
                        } else if diff < 0.0 {
                            Action::TurnCw
                        } else {
                            Action::TurnCcw
                        };
                    }
                    if patience == 0 {
                        self.plan_queue.clear();
                        trace.noplan_fallback = true;
                        return Action::Noop;
                    }
                    self.current_macro = Some(MacroExec::Aim { attacker, patience: patience - 1 });
                    let diff = crate::fortattack::wrap_angle(
                        me.pose.bearing_to(predicted_pose.x, predicted_pose.y) - me.pose.orientation,
                    );
                    return if diff < 0.0 { Action::TurnCw } else { Action::TurnCcw };
                }
                None => continue,
            }
        }
    }

    /// Message a teammate about a hidden attacker: some attacker is in the
    /// forest and unshot, the teammate is strictly closer to it than the ad
    /// hoc agent and has it in range; with several candidates the guard
    /// closest to the attacker wins, and at most one message goes out per
    /// step (most fort-threatening attacker first).
    fn decide_communicate(
        &self,
        views: &[AgentView],
        belief: &BeliefState,
        obs: &Observation,
    ) -> Option<Message> {
        if self.scenario.observability != crate::fortattack::Observability::Partial {
            return None;
        }
        obs.forest?;
        let th = &self.theory;
        let me = &views[ADHOC_ID];
        let mut hidden: Vec<&AgentView> = views
            .iter()
            .filter(|v| v.team == Team::Attacker && v.alive)
            .filter(|v| {
                th.atoms
                    .lookup("in_forest", &[Term::Const(agent_const(v.id).into())])
                    .map(|a| belief.get(th, a) == Some(crate::reasoner::Truth::True))
                    .unwrap_or(false)
            })
            .collect();
        hidden.sort_by(|a, b| {
            let da = ((a.pose.x - obs.fort.x).powi(2) + (a.pose.y - obs.fort.y).powi(2)).sqrt();
            let db = ((b.pose.x - obs.fort.x).powi(2) + (b.pose.y - obs.fort.y).powi(2)).sqrt();
            da.partial_cmp(&db).unwrap().then(a.id.cmp(&b.id))
        });
        for attacker in hidden {
            let my_d = me.pose.distance(&attacker.pose);
            let mut candidates: Vec<(f64, usize)> = views[1..3]
                .iter()
                .filter(|g| g.alive)
                .filter(|g| g.pose.distance(&attacker.pose) < my_d)
                .filter(|g| {
                    th.atoms
                        .lookup(
                            "in_range",
                            &[
                                Term::Const(agent_const(g.id).into()),
                                Term::Const(agent_const(attacker.id).into()),
                            ],
                        )
                        .map(|a| belief.get(th, a) == Some(crate::reasoner::Truth::True))
                        .unwrap_or(false)
                })
                .map(|g| (g.pose.distance(&attacker.pose), g.id))
                .collect();
            candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if let Some(&(_, guard)) = candidates.first() {
                return Some(Message {
                    sender: ADHOC_ID,
                    recipient: guard,
                    attacker: attacker.id,
                    pose: attacker.pose,
                    step: obs.step,
                });
            }
        }
        None
    }
}
