//! Fort Attack arena: three guards (one ad hoc slot) defend a fort against
//! three attackers on the unit square. Movement is cardinal with a fixed
//! velocity, turning is by a fixed angle step, shooting kills opposing
//! agents inside a range-and-bearing cone. Episodes are bit-for-bit
//! deterministic in (seed, action sequence).

mod config;
mod sim;

pub use config::{ConfigError, Fort, Observability, Rect, ScenarioConfig, SpawnBand};
pub use sim::{
    apply_action, infer_action, in_shooting_range, wrap_angle, AgentState, AgentView, Observation, Outcome, Pose,
    SimError, Team, WorldState, ADHOC_ID, N_AGENTS,
};

use serde::{Deserialize, Serialize};

/// The eight environment actions. The id order is frozen: datasets, model
/// files, and logs all use it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    MoveNorth,
    MoveSouth,
    MoveEast,
    MoveWest,
    TurnCw,
    TurnCcw,
    Noop,
    Shoot,
}

pub const N_ACTIONS: usize = 8;
/// Sentinel id for "no previous action" in feature vectors.
pub const NO_ACTION_ID: u8 = 8;

impl Action {
    pub const ALL: [Action; N_ACTIONS] = [
        Action::MoveNorth,
        Action::MoveSouth,
        Action::MoveEast,
        Action::MoveWest,
        Action::TurnCw,
        Action::TurnCcw,
        Action::Noop,
        Action::Shoot,
    ];

    pub fn id(self) -> u8 {
        Action::ALL.iter().position(|a| *a == self).unwrap() as u8
    }

    pub fn from_id(id: u8) -> Option<Action> {
        Action::ALL.get(id as usize).copied()
    }

    /// Left-right arena mirror: east/west and the turn direction flip.
    pub fn mirrored(self) -> Action {
        match self {
            Action::MoveEast => Action::MoveWest,
            Action::MoveWest => Action::MoveEast,
            Action::TurnCw => Action::TurnCcw,
            Action::TurnCcw => Action::TurnCw,
            other => other,
        }
    }
}
