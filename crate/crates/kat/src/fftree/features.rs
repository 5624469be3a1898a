//! Featurization of a world view for behavior prediction.
//!
//! 39 attributes per (state, modeled agent) sample: per-agent x/y (12),
//! distance to the arena center (6), polar angle w.r.t. the center (6),
//! orientation (6), distance to the fort (6), distance from the fort to
//! the nearest live attacker (1), dead-attacker count (1), and the modeled
//! agent's previous action id (1). The modeled agent occupies position 0;
//! the remaining agents follow in ascending id order.

use thiserror::Error;

use crate::fortattack::{AgentView, Fort, Team, N_AGENTS};

pub const N_FEATURES: usize = 39;

/// When no attacker is alive the nearest-attacker distance gets this
/// sentinel (beyond any reachable arena distance).
pub const NO_ATTACKER_DIST: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub [f64; N_FEATURES]);

impl FeatureVector {
    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }
}

pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "a0_x", "a0_y", "a1_x", "a1_y", "a2_x", "a2_y", "a3_x", "a3_y", "a4_x", "a4_y", "a5_x", "a5_y",
    "a0_center_dist", "a1_center_dist", "a2_center_dist", "a3_center_dist", "a4_center_dist",
    "a5_center_dist", "a0_center_angle", "a1_center_angle", "a2_center_angle", "a3_center_angle",
    "a4_center_angle", "a5_center_angle", "a0_orient", "a1_orient", "a2_orient", "a3_orient",
    "a4_orient", "a5_orient", "a0_fort_dist", "a1_fort_dist", "a2_fort_dist", "a3_fort_dist",
    "a4_fort_dist", "a5_fort_dist", "fort_nearest_attacker_dist", "dead_attackers", "prev_action",
];

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("modeled agent {0} is dead")]
    DeadAgent(usize),
    #[error("world view must contain {N_AGENTS} agents, got {0}")]
    WrongAgentCount(usize),
    #[error("modeled agent {0} missing from the view")]
    MissingAgent(usize),
}

/// Build the attribute vector for one modeled agent. The view must carry
/// all six agents (under partial observability the caller substitutes
/// last-seen poses for hidden agents).
pub fn featurize(
    views: &[AgentView],
    fort: &Fort,
    modeled: usize,
    prev_action: u8,
) -> Result<FeatureVector, FeatureError> {
    if views.len() != N_AGENTS {
        return Err(FeatureError::WrongAgentCount(views.len()));
    }
    let me = views
        .iter()
        .find(|v| v.id == modeled)
        .ok_or(FeatureError::MissingAgent(modeled))?;
    if !me.alive {
        return Err(FeatureError::DeadAgent(modeled));
    }

    // Modeled agent first, the rest by ascending id.
    let mut order: Vec<&AgentView> = Vec::with_capacity(N_AGENTS);
    order.push(me);
    let mut rest: Vec<&AgentView> = views.iter().filter(|v| v.id != modeled).collect();
    rest.sort_by_key(|v| v.id);
    order.extend(rest);

    let mut f = [0.0f64; N_FEATURES];
    for (k, v) in order.iter().enumerate() {
        let (x, y) = (v.pose.x, v.pose.y);
        f[2 * k] = x;
        f[2 * k + 1] = y;
        f[12 + k] = ((x - 0.5).powi(2) + (y - 0.5).powi(2)).sqrt();
        f[18 + k] = (y - 0.5).atan2(x - 0.5);
        f[24 + k] = v.pose.orientation;
        f[30 + k] = ((x - fort.x).powi(2) + (y - fort.y).powi(2)).sqrt();
    }
    let nearest = views
        .iter()
        .filter(|v| v.team == Team::Attacker && v.alive)
        .map(|v| ((v.pose.x - fort.x).powi(2) + (v.pose.y - fort.y).powi(2)).sqrt())
        .fold(f64::INFINITY, f64::min);
    f[36] = if nearest.is_finite() { nearest } else { NO_ATTACKER_DIST };
    f[37] = views.iter().filter(|v| v.team == Team::Attacker && !v.alive).count() as f64;
    f[38] = prev_action as f64;
    Ok(FeatureVector(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fortattack::{Pose, NO_ACTION_ID};

    fn six_views() -> Vec<AgentView> {
        (0..N_AGENTS)
            .map(|id| AgentView {
                id,
                team: if id < 3 { Team::Guard } else { Team::Attacker },
                pose: Pose { x: 0.1 * id as f64 + 0.1, y: 0.5, orientation: 0.0 },
                alive: true,
            })
            .collect()
    }

    #[test]
    fn center_distance_is_zero_at_center() {
        let mut views = six_views();
        views[1].pose = Pose { x: 0.5, y: 0.5, orientation: 0.0 };
        let fort = Fort { x: 0.5, y: 0.05, radius: 0.08 };
        let f = featurize(&views, &fort, 1, NO_ACTION_ID).unwrap();
        assert_eq!(f.get(12), 0.0); // modeled agent occupies position 0
    }

    #[test]
    fn dead_attacker_count_starts_at_zero() {
        let views = six_views();
        let fort = Fort { x: 0.5, y: 0.05, radius: 0.08 };
        let f = featurize(&views, &fort, 0, NO_ACTION_ID).unwrap();
        assert_eq!(f.get(37), 0.0);
        assert_eq!(f.get(38), NO_ACTION_ID as f64);
    }

    #[test]
    fn fort_distance_matches_hand_euclidean() {
        let mut views = six_views();
        views[0].pose = Pose { x: 0.3, y: 0.4, orientation: 0.0 };
        let fort = Fort { x: 0.5, y: 0.05, radius: 0.08 };
        let f = featurize(&views, &fort, 0, 0).unwrap();
        let expected = (0.04f64 + 0.1225).sqrt();
        assert!((f.get(30) - expected).abs() < 1e-12);
        assert!((expected - 0.4031128874).abs() < 1e-9);
    }

    #[test]
    fn modeled_agent_must_be_alive() {
        let mut views = six_views();
        views[2].alive = false;
        let fort = Fort { x: 0.5, y: 0.05, radius: 0.08 };
        assert!(featurize(&views, &fort, 2, 0).is_err());
    }

    #[test]
    fn angles_stay_wrapped() {
        let views = six_views();
        let fort = Fort { x: 0.5, y: 0.05, radius: 0.08 };
        for modeled in 0..N_AGENTS {
            let f = featurize(&views, &fort, modeled, 3).unwrap();
            for k in 18..30 {
                assert!(f.get(k) >= -std::f64::consts::PI && f.get(k) <= std::f64::consts::PI);
            }
        }
    }
}
