//! Scripted control laws: the two hand-crafted policies and scripted
//! approximations of the arena's four built-in policies. The originals are
//! neural policies; these reproduce the described behavior only.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::fortattack::{
    in_shooting_range, wrap_angle, Action, AgentState, AgentView, Observation, Pose,
    ScenarioConfig, Team,
};

use super::Message;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyId {
    Policy1,
    Policy2,
    P220,
    P650,
    P1240,
    P1600,
    AttackerSpread,
    AttackerSneak,
    AttackerDistract,
}

impl PolicyId {
    pub const ALL: [PolicyId; 9] = [
        PolicyId::Policy1,
        PolicyId::Policy2,
        PolicyId::P220,
        PolicyId::P650,
        PolicyId::P1240,
        PolicyId::P1600,
        PolicyId::AttackerSpread,
        PolicyId::AttackerSneak,
        PolicyId::AttackerDistract,
    ];

    pub fn parse(s: &str) -> Option<PolicyId> {
        match s {
            "policy1" => Some(PolicyId::Policy1),
            "policy2" => Some(PolicyId::Policy2),
            "p220" => Some(PolicyId::P220),
            "p650" => Some(PolicyId::P650),
            "p1240" => Some(PolicyId::P1240),
            "p1600" => Some(PolicyId::P1600),
            "attacker-spread" => Some(PolicyId::AttackerSpread),
            "attacker-sneak" => Some(PolicyId::AttackerSneak),
            "attacker-distract" => Some(PolicyId::AttackerDistract),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PolicyId::Policy1 => "policy1",
            PolicyId::Policy2 => "policy2",
            PolicyId::P220 => "p220",
            PolicyId::P650 => "p650",
            PolicyId::P1240 => "p1240",
            PolicyId::P1600 => "p1600",
            PolicyId::AttackerSpread => "attacker-spread",
            PolicyId::AttackerSneak => "attacker-sneak",
            PolicyId::AttackerDistract => "attacker-distract",
        }
    }
}

impl std::fmt::Display for PolicyId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A per-agent scripted controller; deterministic given (seed, inputs).
#[derive(Debug, Clone)]
pub struct ScriptedPolicy {
    pub id: PolicyId,
    pub agent_id: usize,
    pub honor_comm_probability: f64,
    rng: ChaCha8Rng,
    waypoints: Vec<(f64, f64)>,
    wp_index: usize,
    /// Honored tip about a hidden attacker: hunted until it expires.
    tip: Option<(Pose, u32)>,
}

fn jitter(rng: &mut ChaCha8Rng, amp: f64) -> f64 {
    rng.random_range(-amp..=amp)
}

impl ScriptedPolicy {
    pub fn new(
        id: PolicyId,
        agent_id: usize,
        seed: u64,
        honor_comm_probability: f64,
        cfg: &ScenarioConfig,
    ) -> ScriptedPolicy {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let waypoints = if agent_id >= 3 {
            attacker_route(id, agent_id - 3, &mut rng, cfg)
        } else {
            Vec::new()
        };
        ScriptedPolicy { id, agent_id, honor_comm_probability, rng, waypoints, wp_index: 0, tip: None }
    }

    pub fn act(&mut self, obs: &Observation, inbox: Option<&Message>, cfg: &ScenarioConfig) -> Action {
        let me = obs.view(self.agent_id).expect("observers see themselves").clone();
        if me.team == Team::Guard {
            self.guard_act(&me, obs, inbox, cfg)
        } else {
            self.attacker_act(&me, obs, cfg)
        }
    }

    // ---- guards --------------------------------------------------------

    fn guard_act(
        &mut self,
        me: &AgentView,
        obs: &Observation,
        inbox: Option<&Message>,
        cfg: &ScenarioConfig,
    ) -> Action {
        // A received message names a hidden attacker; an honoring guard
        // hunts the reported pose until the tip goes stale.
        if let Some(msg) = inbox {
            if self.rng.random_bool(self.honor_comm_probability.clamp(0.0, 1.0)) {
                self.tip = Some((msg.pose, 8));
            }
        }
        // A visible opponent in reach overrides a tip.
        let engaged = nearest_opponent(me, obs)
            .map(|t| dist(&me.pose, t.pose.x, t.pose.y) <= cfg.shoot_range * 1.2)
            .unwrap_or(false);
        if !engaged {
            if let Some((pose, ttl)) = self.tip {
                if ttl == 0 {
                    self.tip = None;
                } else {
                    self.tip = Some((pose, ttl - 1));
                    let d = dist(&me.pose, pose.x, pose.y);
                    if d <= cfg.shoot_range {
                        return match turn_toward(&me.pose, pose.x, pose.y, cfg) {
                            None => Action::Shoot,
                            Some(turn) => turn,
                        };
                    }
                    return approach(&me.pose, pose.x, pose.y);
                }
            }
        }
        match self.id {
            PolicyId::Policy1 | PolicyId::AttackerSpread | PolicyId::AttackerSneak
            | PolicyId::AttackerDistract => {
                let slot = ring_slot(cfg, self.agent_id, 0.16, 0.55);
                self.hold_and_shoot(me, obs, cfg, slot, 1.0)
            }
            PolicyId::Policy2 => {
                let slot = ring_slot(cfg, self.agent_id, 0.30, 0.85);
                self.hold_and_shoot(me, obs, cfg, slot, 1.0)
            }
            PolicyId::P220 => {
                let xs = [0.38, 0.50, 0.62];
                let slot = (xs[self.agent_id.min(2)], cfg.fort.y + 0.11);
                if dist(&me.pose, slot.0, slot.1) > 0.05 {
                    return approach(&me.pose, slot.0, slot.1);
                }
                // Continuous fire; only break off to track a close attacker.
                if let Some(t) = nearest_opponent(me, obs) {
                    if dist(&me.pose, t.pose.x, t.pose.y) <= 1.5 * cfg.shoot_range {
                        if let Some(turn) = turn_toward(&me.pose, t.pose.x, t.pose.y, cfg) {
                            return turn;
                        }
                    }
                }
                Action::Shoot
            }
            PolicyId::P650 => {
                // Block: stand between the fort and the nearest attacker.
                if let Some(t) = nearest_opponent(me, obs) {
                    if let Some(a) = engage(me, t, cfg, 1.0) {
                        return a;
                    }
                    let b = (t.pose.y - cfg.fort.y).atan2(t.pose.x - cfg.fort.x);
                    let slot = (cfg.fort.x + 0.13 * b.cos(), cfg.fort.y + 0.13 * b.sin());
                    if dist(&me.pose, slot.0, slot.1) > 0.04 {
                        return approach(&me.pose, slot.0, slot.1);
                    }
                    return turn_toward(&me.pose, t.pose.x, t.pose.y, cfg).unwrap_or(Action::Noop);
                }
                self.hold_and_shoot(me, obs, cfg, ring_slot(cfg, self.agent_id, 0.13, 0.50), 1.0)
            }
            PolicyId::P1240 => {
                let slot = ring_slot(cfg, self.agent_id, 0.35, 0.95);
                self.hold_and_shoot(me, obs, cfg, slot, 1.0)
            }
            PolicyId::P1600 => {
                // Willing to leave the fort: pure pursuit of the nearest attacker.
                if let Some(t) = nearest_opponent(me, obs) {
                    if let Some(a) = engage(me, t, cfg, 1.0) {
                        return a;
                    }
                    return approach(&me.pose, t.pose.x, t.pose.y);
                }
                Action::Noop
            }
        }
    }

    // ---- attackers -----------------------------------------------------

    fn attacker_act(&mut self, me: &AgentView, obs: &Observation, cfg: &ScenarioConfig) -> Action {
        let shoots_back = matches!(self.id, PolicyId::Policy2 | PolicyId::P1600 | PolicyId::AttackerDistract);
        let holds_midfield = matches!(self.id, PolicyId::P1600 | PolicyId::AttackerDistract)
            && self.agent_id - 3 < 2;
        if shoots_back {
            if let Some(t) = nearest_opponent(me, obs) {
                if let Some(a) = engage(me, t, cfg, 1.0) {
                    if holds_midfield || dist(&me.pose, t.pose.x, t.pose.y) <= cfg.shoot_range {
                        return a;
                    }
                }
            }
        }
        // Follow the waypoint route, then press the fort.
        while self.wp_index < self.waypoints.len() {
            let (wx, wy) = self.waypoints[self.wp_index];
            if dist(&me.pose, wx, wy) <= 0.06 {
                self.wp_index += 1;
                continue;
            }
            if holds_midfield && self.wp_index == self.waypoints.len() - 1
                && dist(&me.pose, wx, wy) <= 0.10
            {
                // Distractors loiter at their stand-off point.
                return Action::Noop;
            }
            return approach(&me.pose, wx, wy);
        }
        // Center feints in the sneak policies advance in bursts.
        if matches!(self.id, PolicyId::P650 | PolicyId::P1240 | PolicyId::AttackerSneak)
            && self.agent_id == 5
            && obs.step % 3 == 0
        {
            return Action::Noop;
        }
        if holds_midfield {
            return Action::Noop;
        }
        approach(&me.pose, cfg.fort.x, cfg.fort.y)
    }
}

/// Attacker routes per policy; jittered once per episode from the policy's
/// own stream. Index k is the attacker slot (0..3).
fn attacker_route(id: PolicyId, k: usize, rng: &mut ChaCha8Rng, cfg: &ScenarioConfig) -> Vec<(f64, f64)> {
    let mut wps: Vec<(f64, f64)> = Vec::new();
    match id {
        PolicyId::Policy1 | PolicyId::Policy2 | PolicyId::AttackerSpread => {
            // Zig-zag descent: long straight legs keyed to fixed bands, so
            // the approach spreads across the field on its way down. The
            // two hand-crafted policies sweep mirrored lanes at different
            // heights, which keeps their models distinguishable.
            let spawn_x = cfg.attacker_spawn.xs[k];
            let (zig, zag, y1, y2, y3) = if id == PolicyId::Policy2 {
                let (zig, zag) = [(0.05, 0.60), (0.85, 0.30), (0.95, 0.45)][k];
                (zig, zag, 0.74, 0.50, 0.24)
            } else {
                let (zig, zag) = [(0.65, 0.35), (0.15, 0.60), (0.35, 0.70)][k];
                (zig, zag, 0.68, 0.42, 0.18)
            };
            let y1 = y1 + jitter(rng, 0.02);
            let y2 = y2 + jitter(rng, 0.02);
            let y3 = y3 + jitter(rng, 0.02);
            let zig = (zig + jitter(rng, 0.02)).clamp(0.03, 0.97);
            let zag = (zag + jitter(rng, 0.02)).clamp(0.03, 0.97);
            wps.push((spawn_x, y1));
            wps.push((zig, y1));
            wps.push((zig, y2));
            wps.push((zag, y2));
            wps.push((zag, y3));
            // Final approach arc: policy1 hooks in from the west of the
            // fort, policy2 from the east.
            let hook = if id == PolicyId::Policy2 { cfg.fort.x + 0.18 } else { cfg.fort.x - 0.18 };
            wps.push(((hook + jitter(rng, 0.02)).clamp(0.03, 0.97), cfg.fort.y + 0.08));
        }
        PolicyId::P220 => {}
        PolicyId::P650 | PolicyId::P1240 | PolicyId::AttackerSneak => {
            // Edge descent, then a swing across the bottom band so the
            // final approach comes from a policy-specific side: p650-style
            // sneaks swing to the east of the fort, p1240-style to the
            // west.
            let swing_east = id != PolicyId::P1240;
            let sx = if swing_east { cfg.fort.x + 0.26 } else { cfg.fort.x - 0.26 };
            let sy = cfg.fort.y + 0.09;
            match k {
                0 => {
                    let x = 0.05 + jitter(rng, 0.03).abs();
                    wps.push((x, 0.60 + jitter(rng, 0.05)));
                    wps.push((x, sy + jitter(rng, 0.02)));
                    wps.push((sx + jitter(rng, 0.03), sy));
                }
                1 => {
                    let x = 0.95 - jitter(rng, 0.03).abs();
                    wps.push((x, 0.60 + jitter(rng, 0.05)));
                    wps.push((x, sy + jitter(rng, 0.02)));
                    wps.push((sx + jitter(rng, 0.03), sy));
                }
                _ => {
                    wps.push((0.5 + jitter(rng, 0.08), 0.70));
                    wps.push((sx + jitter(rng, 0.03), 0.30));
                }
            }
        }
        PolicyId::P1600 | PolicyId::AttackerDistract => match k {
            0 => wps.push((0.38 + jitter(rng, 0.04), 0.45 + jitter(rng, 0.04))),
            1 => wps.push((0.62 + jitter(rng, 0.04), 0.45 + jitter(rng, 0.04))),
            _ => {
                let x = 0.05 + jitter(rng, 0.03).abs();
                wps.push((x, 0.60 + jitter(rng, 0.05)));
                wps.push((x, cfg.fort.y + 0.12 + jitter(rng, 0.02)));
                wps.push((cfg.fort.x + 0.26 + jitter(rng, 0.03), cfg.fort.y + 0.09));
            }
        },
    }
    // A route whose first leg crosses the forest band goes through the
    // cover instead: entry above it, a jittered interior point, an exit on
    // the fort side, then the direct press.
    if let Some(f) = &cfg.forest {
        if wps.first().map(|(x, _)| *x >= f.x0 - 0.1 && *x <= f.x1 + 0.1).unwrap_or(false) {
            let (fx, fy) = f.center();
            let through = (
                (fx + jitter(rng, (f.x1 - f.x0) * 0.25)).clamp(f.x0 + 0.02, f.x1 - 0.02),
                (fy + jitter(rng, (f.y1 - f.y0) * 0.25)).clamp(f.y0 + 0.02, f.y1 - 0.02),
            );
            let entry = (through.0, (f.y1 + 0.06).min(0.97));
            let exit = (through.0, (f.y0 - 0.05).max(0.03));
            return vec![entry, through, exit];
        }
    }
    wps
}

// ---- shared control-law helpers ---------------------------------------

fn dist(p: &Pose, x: f64, y: f64) -> f64 {
    ((p.x - x).powi(2) + (p.y - y).powi(2)).sqrt()
}

/// `None` when aligned within the shooting cone. The turn lattice spaces
/// orientations by the turn step, so convergence needs the tolerance to be
/// at least half a turn step; the default cone half-width satisfies that.
fn turn_toward(p: &Pose, x: f64, y: f64, cfg: &ScenarioConfig) -> Option<Action> {
    let diff = wrap_angle(p.bearing_to(x, y) - p.orientation);
    let tolerance = cfg.shoot_halfwidth.max(cfg.turn_step / 2.0);
    if diff.abs() <= tolerance {
        None
    } else if diff < 0.0 {
        Some(Action::TurnCw)
    } else {
        Some(Action::TurnCcw)
    }
}

/// Cardinal move along the dominant axis toward a point.
fn approach(p: &Pose, x: f64, y: f64) -> Action {
    let (dx, dy) = (x - p.x, y - p.y);
    if dx.abs() >= dy.abs() {
        if dx >= 0.0 {
            Action::MoveEast
        } else {
            Action::MoveWest
        }
    } else if dy >= 0.0 {
        Action::MoveNorth
    } else {
        Action::MoveSouth
    }
}

fn nearest_opponent<'a>(me: &AgentView, obs: &'a Observation) -> Option<&'a AgentView> {
    obs.visible
        .iter()
        .filter(|v| v.alive && v.team != me.team)
        .min_by(|a, b| {
            let da = dist(&me.pose, a.pose.x, a.pose.y);
            let db = dist(&me.pose, b.pose.x, b.pose.y);
            da.partial_cmp(&db).unwrap().then(a.id.cmp(&b.id))
        })
}

/// Shoot when the target is inside the engage envelope and the cone, turn
/// toward it when inside but misaligned, `None` when out of reach.
fn engage(me: &AgentView, target: &AgentView, cfg: &ScenarioConfig, envelope: f64) -> Option<Action> {
    let d = dist(&me.pose, target.pose.x, target.pose.y);
    if d > cfg.shoot_range * envelope {
        return None;
    }
    let shooter = AgentState { id: me.id, team: me.team, pose: me.pose, alive: true, last_action: None };
    let t = AgentState {
        id: target.id,
        team: target.team,
        pose: target.pose,
        alive: true,
        last_action: None,
    };
    if in_shooting_range(&shooter, &t, cfg) {
        Some(Action::Shoot)
    } else {
        turn_toward(&me.pose, target.pose.x, target.pose.y, cfg)
    }
}

/// Guard ring slot around the fort.
fn ring_slot(cfg: &ScenarioConfig, guard_id: usize, radius: f64, spread: f64) -> (f64, f64) {
    let offset = (guard_id as f64 - 1.0) * spread;
    let angle = std::f64::consts::FRAC_PI_2 + offset;
    (
        (cfg.fort.x + radius * angle.cos()).clamp(0.02, 0.98),
        (cfg.fort.y + radius * angle.sin()).clamp(0.02, 0.98),
    )
}

impl ScriptedPolicy {
    /// Default guard law: engage anything in range, reach the slot, then
    /// patrol a short east-west beat across it.
    fn hold_and_shoot(
        &mut self,
        me: &AgentView,
        obs: &Observation,
        cfg: &ScenarioConfig,
        slot: (f64, f64),
        envelope: f64,
    ) -> Action {
        if let Some(t) = nearest_opponent(me, obs) {
            if let Some(a) = engage(me, t, cfg, envelope) {
                return a;
            }
        }
        if (me.pose.y - slot.1).abs() > 0.06 || (me.pose.x - slot.0).abs() > 0.12 {
            return approach(&me.pose, slot.0, slot.1);
        }
        // Pace on the spot: the side of the slot decides the direction, so
        // the beat is a pure function of position. Policy2 paces the other
        // axis.
        if self.id == PolicyId::Policy2 {
            if me.pose.y < slot.1 {
                Action::MoveNorth
            } else {
                Action::MoveSouth
            }
        } else if me.pose.x < slot.0 {
            Action::MoveEast
        } else {
            Action::MoveWest
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fortattack::{Fort, Observability, WorldState};

    fn obs_with(agents: Vec<AgentView>, step: u32) -> Observation {
        Observation {
            observer: agents[0].id,
            step,
            visible: agents,
            hidden: Vec::new(),
            fort: Fort { x: 0.5, y: 0.05, radius: 0.08 },
            forest: None,
        }
    }

    fn view(id: usize, team: Team, x: f64, y: f64, o: f64) -> AgentView {
        AgentView { id, team, pose: Pose { x, y, orientation: o }, alive: true }
    }

    #[test]
    fn policy1_guard_shoots_attacker_in_cone() {
        let cfg = ScenarioConfig::default();
        let mut p = ScriptedPolicy::new(PolicyId::Policy1, 1, 7, 1.0, &cfg);
        // Guard at its slot, attacker dead ahead within range.
        let slot = ring_slot(&cfg, 1, 0.16, 0.55);
        let guard = view(1, Team::Guard, slot.0, slot.1, std::f64::consts::FRAC_PI_2);
        let attacker = view(3, Team::Attacker, slot.0, slot.1 + 0.2, 0.0);
        let obs = obs_with(vec![guard, attacker], 5);
        assert_eq!(p.act(&obs, None, &cfg), Action::Shoot);
    }

    #[test]
    fn p220_guard_fires_even_with_nobody_near() {
        let cfg = ScenarioConfig::default();
        let mut p = ScriptedPolicy::new(PolicyId::P220, 1, 7, 1.0, &cfg);
        let guard = view(1, Team::Guard, 0.50, cfg.fort.y + 0.11, std::f64::consts::FRAC_PI_2);
        let attacker = view(3, Team::Attacker, 0.9, 0.95, 0.0);
        let obs = obs_with(vec![guard, attacker], 9);
        assert_eq!(p.act(&obs, None, &cfg), Action::Shoot, "continuous fire");
    }

    #[test]
    fn honoring_guard_turns_toward_the_reported_attacker() {
        let cfg = ScenarioConfig::default();
        let mut p = ScriptedPolicy::new(PolicyId::Policy1, 1, 7, 1.0, &cfg);
        let slot = ring_slot(&cfg, 1, 0.16, 0.55);
        // Facing north; the tip is to the east, out of the current cone.
        let guard = view(1, Team::Guard, slot.0, slot.1, std::f64::consts::FRAC_PI_2);
        let obs = obs_with(vec![guard], 4);
        let msg = crate::agents::Message {
            sender: 0,
            recipient: 1,
            attacker: 4,
            pose: Pose { x: slot.0 + 0.2, y: slot.1, orientation: 0.0 },
            step: 4,
        };
        let a = p.act(&obs, Some(&msg), &cfg);
        assert_eq!(a, Action::TurnCw, "orient toward the reported pose this step");
        // The tip persists: next step (no message) it keeps hunting.
        let b = p.act(&obs, None, &cfg);
        assert!(matches!(b, Action::TurnCw | Action::Shoot));
    }

    #[test]
    fn dataset_generation_runs_all_policies_to_termination() {
        let cfg = ScenarioConfig::default();
        for id in PolicyId::ALL {
            let mut world = WorldState::reset(13, &cfg).unwrap();
            let mut agents: Vec<ScriptedPolicy> =
                (0..6).map(|i| ScriptedPolicy::new(id, i, 100 + i as u64, 1.0, &cfg)).collect();
            for _ in 0..cfg.max_steps {
                let mut joint = [None; 6];
                for i in 0..6 {
                    if world.agents[i].alive {
                        let obs = world.observe(i, Observability::Full).unwrap();
                        joint[i] = Some(agents[i].act(&obs, None, &cfg));
                    }
                }
                if world.step(&joint).unwrap().is_some() {
                    break;
                }
            }
            assert!(world.outcome.is_some() || world.step == cfg.max_steps, "{id} stalls");
        }
    }
}
