//! World state, transition dynamics, and observations.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{ConfigError, Fort, Observability, Rect, ScenarioConfig};
use super::Action;

pub const N_AGENTS: usize = 6;
/// Guard slot 0 is the ad hoc agent's.
pub const ADHOC_ID: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Team {
    Guard,
    Attacker,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    /// Radians in [-pi, pi]; 0 faces +x ("east"), pi/2 faces +y ("north").
    pub orientation: f64,
}

pub fn wrap_angle(a: f64) -> f64 {
    let mut a = a % std::f64::consts::TAU;
    if a > std::f64::consts::PI {
        a -= std::f64::consts::TAU;
    } else if a < -std::f64::consts::PI {
        a += std::f64::consts::TAU;
    }
    a
}

impl Pose {
    pub fn distance(&self, other: &Pose) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
    pub fn bearing_to(&self, x: f64, y: f64) -> f64 {
        (y - self.y).atan2(x - self.x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: usize,
    pub team: Team,
    pub pose: Pose,
    pub alive: bool,
    pub last_action: Option<Action>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    GuardsWinTimeout,
    GuardsWinEliminated,
    AttackersWinReachedFort,
    AttackersWinEliminatedGuards,
}

impl Outcome {
    pub fn guards_win(self) -> bool {
        matches!(self, Outcome::GuardsWinTimeout | Outcome::GuardsWinEliminated)
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("episode already ended with {0:?}")]
    EpisodeOver(Outcome),
    #[error("agent {0} is dead and cannot act")]
    DeadAgentAction(usize),
    #[error("live agent {0} needs an action")]
    MissingAction(usize),
    #[error("agent {0} is dead and cannot observe")]
    DeadObserver(usize),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub agents: Vec<AgentState>,
    pub step: u32,
    pub fort: Fort,
    pub forest: Option<Rect>,
    pub rng_seed: u64,
    pub outcome: Option<Outcome>,
    pub config: ScenarioConfig,
    cooldowns: Vec<u32>,
}

/// Visible slice of the world for one observer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub observer: usize,
    pub step: u32,
    pub visible: Vec<AgentView>,
    pub hidden: Vec<usize>,
    pub fort: Fort,
    pub forest: Option<Rect>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentView {
    pub id: usize,
    pub team: Team,
    pub pose: Pose,
    pub alive: bool,
}

impl Observation {
    pub fn view(&self, id: usize) -> Option<&AgentView> {
        self.visible.iter().find(|v| v.id == id)
    }
}

impl WorldState {
    /// Deterministic spawn: guards in a band near the fort, attackers along
    /// the far edge, jittered from the seed.
    pub fn reset(seed: u64, config: &ScenarioConfig) -> Result<WorldState, SimError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut agents = Vec::with_capacity(N_AGENTS);
        for i in 0..3 {
            let band = &config.guard_spawn;
            let x = (band.xs[i] + rng.random_range(-band.jitter..=band.jitter)).clamp(0.0, 1.0);
            let y = rng.random_range(band.y0..=band.y1);
            agents.push(AgentState {
                id: i,
                team: Team::Guard,
                pose: Pose { x, y, orientation: std::f64::consts::FRAC_PI_2 },
                alive: true,
                last_action: None,
            });
        }
        for i in 0..3 {
            let band = &config.attacker_spawn;
            let x = (band.xs[i] + rng.random_range(-band.jitter..=band.jitter)).clamp(0.0, 1.0);
            let y = rng.random_range(band.y0..=band.y1);
            agents.push(AgentState {
                id: 3 + i,
                team: Team::Attacker,
                pose: Pose { x, y, orientation: -std::f64::consts::FRAC_PI_2 },
                alive: true,
                last_action: None,
            });
        }
        Ok(WorldState {
            agents,
            step: 0,
            fort: config.fort,
            forest: config.forest,
            rng_seed: seed,
            outcome: None,
            config: config.clone(),
            cooldowns: vec![0; N_AGENTS],
        })
    }

    pub fn live_agents(&self) -> impl Iterator<Item = &AgentState> {
        self.agents.iter().filter(|a| a.alive)
    }

    /// Advance one step: moves and turns apply simultaneously from the
    /// pre-step state, then all shots resolve simultaneously from the
    /// post-move poses (mutual kills possible).
    pub fn step(&mut self, joint: &[Option<Action>; N_AGENTS]) -> Result<Option<Outcome>, SimError> {
        if let Some(o) = self.outcome {
            return Err(SimError::EpisodeOver(o));
        }
        for (i, a) in self.agents.iter().enumerate() {
            match (a.alive, joint[i]) {
                (false, Some(_)) => return Err(SimError::DeadAgentAction(i)),
                (true, None) => return Err(SimError::MissingAction(i)),
                _ => {}
            }
        }

        // Movement and turning.
        for i in 0..N_AGENTS {
            let Some(action) = joint[i] else { continue };
            let v = self.config.velocity;
            let a = &mut self.agents[i];
            match action {
                Action::MoveNorth => a.pose.y = (a.pose.y + v).clamp(0.0, 1.0),
                Action::MoveSouth => a.pose.y = (a.pose.y - v).clamp(0.0, 1.0),
                Action::MoveEast => a.pose.x = (a.pose.x + v).clamp(0.0, 1.0),
                Action::MoveWest => a.pose.x = (a.pose.x - v).clamp(0.0, 1.0),
                Action::TurnCw => a.pose.orientation = wrap_angle(a.pose.orientation - self.config.turn_step),
                Action::TurnCcw => a.pose.orientation = wrap_angle(a.pose.orientation + self.config.turn_step),
                Action::Noop | Action::Shoot => {}
            }
            a.last_action = Some(action);
        }

        // Shots: all judged against pre-shot liveness and post-move poses.
        let mut killed = [false; N_AGENTS];
        for i in 0..N_AGENTS {
            if joint[i] != Some(Action::Shoot) || !self.agents[i].alive {
                continue;
            }
            if self.cooldowns[i] > 0 {
                continue;
            }
            let shooter = &self.agents[i];
            let mut hits: Vec<(f64, usize)> = self
                .agents
                .iter()
                .filter(|t| t.alive && t.team != shooter.team)
                .filter(|t| in_shooting_range(shooter, t, &self.config))
                .map(|t| (shooter.pose.distance(&t.pose), t.id))
                .collect();
            if self.config.single_target_shots {
                hits.sort_by(|a, b| a.partial_cmp(b).unwrap());
                hits.truncate(1);
            }
            for (_, id) in hits {
                killed[id] = true;
            }
        }
        for i in 0..N_AGENTS {
            if joint[i] == Some(Action::Shoot) && self.agents[i].alive && self.cooldowns[i] == 0 {
                self.cooldowns[i] = self.config.shot_cooldown;
            } else if self.cooldowns[i] > 0 {
                self.cooldowns[i] -= 1;
            }
        }
        for (i, k) in killed.iter().enumerate() {
            if *k {
                self.agents[i].alive = false;
            }
        }

        self.step += 1;

        // Outcome, checked in the declared order.
        let live_attackers = self.agents.iter().filter(|a| a.alive && a.team == Team::Attacker).count();
        let live_guards = self.agents.iter().filter(|a| a.alive && a.team == Team::Guard).count();
        let fort_reached = self.agents.iter().any(|a| {
            a.alive
                && a.team == Team::Attacker
                && ((a.pose.x - self.fort.x).powi(2) + (a.pose.y - self.fort.y).powi(2)).sqrt()
                    <= self.fort.radius
        });
        let outcome = if self.step >= self.config.max_steps {
            Some(Outcome::GuardsWinTimeout)
        } else if live_attackers == 0 {
            Some(Outcome::GuardsWinEliminated)
        } else if fort_reached {
            Some(Outcome::AttackersWinReachedFort)
        } else if live_guards == 0 {
            Some(Outcome::AttackersWinEliminatedGuards)
        } else {
            None
        };
        self.outcome = outcome;
        Ok(outcome)
    }

    /// What `agent_id` can see. Under partial observability any agent
    /// inside the forest is hidden from guards other than the ad hoc agent;
    /// attackers and the ad hoc agent see everything.
    pub fn observe(&self, agent_id: usize, mode: Observability) -> Result<Observation, SimError> {
        let me = &self.agents[agent_id];
        if !me.alive {
            return Err(SimError::DeadObserver(agent_id));
        }
        let blind_to_forest = mode == Observability::Partial
            && me.team == Team::Guard
            && agent_id != ADHOC_ID
            && self.forest.is_some();
        let mut visible = Vec::with_capacity(N_AGENTS);
        let mut hidden = Vec::new();
        for a in &self.agents {
            let in_forest = self
                .forest
                .map(|f| f.contains(a.pose.x, a.pose.y))
                .unwrap_or(false);
            if blind_to_forest && in_forest && a.id != agent_id {
                hidden.push(a.id);
            } else {
                visible.push(AgentView { id: a.id, team: a.team, pose: a.pose, alive: a.alive });
            }
        }
        Ok(Observation {
            observer: agent_id,
            step: self.step,
            visible,
            hidden,
            fort: self.fort,
            forest: self.forest,
        })
    }
}

/// One agent's kinematics for a single action, identical to the step
/// function's movement phase (used to turn predicted actions into
/// predicted poses).
pub fn apply_action(pose: &Pose, action: Action, config: &ScenarioConfig) -> Pose {
    let mut p = *pose;
    let v = config.velocity;
    match action {
        Action::MoveNorth => p.y = (p.y + v).clamp(0.0, 1.0),
        Action::MoveSouth => p.y = (p.y - v).clamp(0.0, 1.0),
        Action::MoveEast => p.x = (p.x + v).clamp(0.0, 1.0),
        Action::MoveWest => p.x = (p.x - v).clamp(0.0, 1.0),
        Action::TurnCw => p.orientation = wrap_angle(p.orientation - config.turn_step),
        Action::TurnCcw => p.orientation = wrap_angle(p.orientation + config.turn_step),
        Action::Noop | Action::Shoot => {}
    }
    p
}

/// Distance-and-bearing cone test. The bearing is undefined for coincident
/// poses; distance zero always hits.
pub fn in_shooting_range(shooter: &AgentState, target: &AgentState, config: &ScenarioConfig) -> bool {
    let d = shooter.pose.distance(&target.pose);
    if d > config.shoot_range {
        return false;
    }
    if d == 0.0 {
        return true;
    }
    let bearing = shooter.pose.bearing_to(target.pose.x, target.pose.y);
    wrap_angle(bearing - shooter.pose.orientation).abs() <= config.shoot_halfwidth
}

/// Infer an agent's action from two consecutive poses. Shots leave the pose
/// unchanged, so a shot is only recognized when an opposing agent died this
/// step inside the agent's cone; otherwise an unchanged pose reads as noop
/// (a clamped move at the wall also reads as noop).
pub fn infer_action(
    prev: &AgentView,
    cur: &AgentView,
    opponents_died: &[&AgentView],
    config: &ScenarioConfig,
) -> Action {
    let eps = 1e-12;
    let dx = cur.pose.x - prev.pose.x;
    let dy = cur.pose.y - prev.pose.y;
    if dx.abs() > eps || dy.abs() > eps {
        return if dx.abs() >= dy.abs() {
            if dx > 0.0 {
                Action::MoveEast
            } else {
                Action::MoveWest
            }
        } else if dy > 0.0 {
            Action::MoveNorth
        } else {
            Action::MoveSouth
        };
    }
    let dth = wrap_angle(cur.pose.orientation - prev.pose.orientation);
    if dth.abs() > eps {
        return if dth < 0.0 { Action::TurnCw } else { Action::TurnCcw };
    }
    let me = AgentState { id: cur.id, team: cur.team, pose: cur.pose, alive: true, last_action: None };
    for dead in opponents_died {
        let t = AgentState {
            id: dead.id,
            team: dead.team,
            pose: dead.pose,
            alive: true,
            last_action: None,
        };
        if t.team != me.team && in_shooting_range(&me, &t, config) {
            return Action::Shoot;
        }
    }
    Action::Noop
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noops() -> [Option<Action>; N_AGENTS] {
        [Some(Action::Noop); N_AGENTS]
    }

    #[test]
    fn same_seed_same_world() {
        let cfg = ScenarioConfig::default();
        let a = WorldState::reset(7, &cfg).unwrap();
        let b = WorldState::reset(7, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_move_attackers() {
        let cfg = ScenarioConfig::default();
        let a = WorldState::reset(1, &cfg).unwrap();
        let b = WorldState::reset(2, &cfg).unwrap();
        assert_ne!(a.agents[3].pose.x, b.agents[3].pose.x);
    }

    #[test]
    fn overlapping_bands_rejected() {
        let mut cfg = ScenarioConfig::default();
        cfg.guard_spawn.y1 = 0.9;
        assert!(WorldState::reset(0, &cfg).is_err());
    }

    #[test]
    fn noop_step_changes_nothing_until_timeout() {
        let cfg = ScenarioConfig::default();
        let mut w = WorldState::reset(3, &cfg).unwrap();
        let before = w.agents.clone();
        for _ in 0..(cfg.max_steps - 1) {
            assert_eq!(w.step(&noops()).unwrap(), None);
        }
        for (a, b) in w.agents.iter().zip(before.iter()) {
            assert_eq!(a.pose, b.pose);
            assert!(a.alive);
        }
        assert_eq!(w.step(&noops()).unwrap(), Some(Outcome::GuardsWinTimeout));
        assert!(w.step(&noops()).is_err());
    }

    #[test]
    fn attacker_in_fort_wins() {
        let cfg = ScenarioConfig::default();
        let mut w = WorldState::reset(3, &cfg).unwrap();
        w.agents[3].pose = Pose { x: 0.5, y: 0.12, orientation: -std::f64::consts::FRAC_PI_2 };
        let mut joint = noops();
        joint[3] = Some(Action::MoveSouth);
        assert_eq!(w.step(&joint).unwrap(), Some(Outcome::AttackersWinReachedFort));
    }

    #[test]
    fn aligned_shot_kills_attacker_in_range() {
        let cfg = ScenarioConfig::default();
        let mut w = WorldState::reset(3, &cfg).unwrap();
        w.agents[0].pose = Pose { x: 0.5, y: 0.3, orientation: std::f64::consts::FRAC_PI_2 };
        w.agents[3].pose = Pose { x: 0.5, y: 0.5, orientation: -std::f64::consts::FRAC_PI_2 };
        let mut joint = noops();
        joint[0] = Some(Action::Shoot);
        w.step(&joint).unwrap();
        assert!(!w.agents[3].alive);
    }

    #[test]
    fn cone_misses_off_axis_target() {
        let cfg = ScenarioConfig::default();
        let shooter = AgentState {
            id: 0,
            team: Team::Guard,
            pose: Pose { x: 0.5, y: 0.3, orientation: std::f64::consts::FRAC_PI_2 },
            alive: true,
            last_action: None,
        };
        // Bearing offset pi/4 > halfwidth pi/6 at distance 0.2.
        let off = 0.2 / std::f64::consts::SQRT_2;
        let target = AgentState {
            id: 3,
            team: Team::Attacker,
            pose: Pose { x: 0.5 + off, y: 0.3 + off, orientation: 0.0 },
            alive: true,
            last_action: None,
        };
        assert!(!in_shooting_range(&shooter, &target, &cfg));
        // Distance beyond range misses even when aligned.
        let far = AgentState {
            id: 4,
            team: Team::Attacker,
            pose: Pose { x: 0.5, y: 0.6 + 1e-9, orientation: 0.0 },
            alive: true,
            last_action: None,
        };
        assert!(!in_shooting_range(&shooter, &far, &cfg));
        // Coincident poses always hit.
        let here = AgentState { pose: shooter.pose, ..far.clone() };
        assert!(in_shooting_range(&shooter, &here, &cfg));
    }

    #[test]
    fn mutual_kills_resolve_simultaneously() {
        let cfg = ScenarioConfig::default();
        let mut w = WorldState::reset(3, &cfg).unwrap();
        w.agents[0].pose = Pose { x: 0.5, y: 0.3, orientation: std::f64::consts::FRAC_PI_2 };
        w.agents[3].pose = Pose { x: 0.5, y: 0.45, orientation: -std::f64::consts::FRAC_PI_2 };
        let mut joint = noops();
        joint[0] = Some(Action::Shoot);
        joint[3] = Some(Action::Shoot);
        w.step(&joint).unwrap();
        assert!(!w.agents[0].alive);
        assert!(!w.agents[3].alive);
    }

    #[test]
    fn forest_hides_from_plain_guards_only() {
        let mut cfg = ScenarioConfig::default();
        cfg.forest = Some(Rect { x0: 0.1, y0: 0.35, x1: 0.4, y1: 0.65 });
        cfg.observability = Observability::Partial;
        let mut w = WorldState::reset(3, &cfg).unwrap();
        w.agents[4].pose = Pose { x: 0.2, y: 0.5, orientation: 0.0 };

        let plain_guard = w.observe(1, Observability::Partial).unwrap();
        assert!(plain_guard.hidden.contains(&4));
        assert!(plain_guard.view(4).is_none());

        let adhoc = w.observe(ADHOC_ID, Observability::Partial).unwrap();
        assert!(adhoc.hidden.is_empty());
        assert!(adhoc.view(4).is_some());

        let attacker = w.observe(3, Observability::Partial).unwrap();
        assert!(attacker.hidden.is_empty());

        let full = w.observe(1, Observability::Full).unwrap();
        assert!(full.hidden.is_empty());
    }

    #[test]
    fn alive_count_is_non_increasing_and_population_constant() {
        let cfg = ScenarioConfig::default();
        let mut w = WorldState::reset(9, &cfg).unwrap();
        let mut last_alive = w.live_agents().count();
        for step in 0..40 {
            let mut joint = [None; N_AGENTS];
            for a in &w.agents {
                if a.alive {
                    joint[a.id] = Some(if step % 3 == 0 { Action::Shoot } else { Action::MoveSouth });
                }
            }
            if w.step(&joint).unwrap().is_some() {
                break;
            }
            assert_eq!(w.agents.len(), N_AGENTS);
            let alive = w.live_agents().count();
            assert!(alive <= last_alive);
            last_alive = alive;
            for a in &w.agents {
                assert!(a.pose.x >= 0.0 && a.pose.x <= 1.0 && a.pose.y >= 0.0 && a.pose.y <= 1.0);
            }
        }
    }

    #[test]
    fn infer_action_reads_moves_turns_and_shots() {
        let cfg = ScenarioConfig::default();
        let at = |x: f64, y: f64, o: f64| AgentView {
            id: 0,
            team: Team::Guard,
            pose: Pose { x, y, orientation: o },
            alive: true,
        };
        assert_eq!(infer_action(&at(0.5, 0.5, 0.0), &at(0.5, 0.55, 0.0), &[], &cfg), Action::MoveNorth);
        assert_eq!(infer_action(&at(0.5, 0.5, 0.0), &at(0.45, 0.5, 0.0), &[], &cfg), Action::MoveWest);
        assert_eq!(
            infer_action(&at(0.5, 0.5, 0.0), &at(0.5, 0.5, -cfg.turn_step), &[], &cfg),
            Action::TurnCw
        );
        assert_eq!(infer_action(&at(0.5, 0.5, 0.0), &at(0.5, 0.5, 0.0), &[], &cfg), Action::Noop);
        let dead = AgentView {
            id: 3,
            team: Team::Attacker,
            pose: Pose { x: 0.6, y: 0.5, orientation: 0.0 },
            alive: false,
        };
        assert_eq!(infer_action(&at(0.5, 0.5, 0.0), &at(0.5, 0.5, 0.0), &[&dead], &cfg), Action::Shoot);
    }
}
