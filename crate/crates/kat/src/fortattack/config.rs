//! Scenario configuration: geometry, kinematics, observability.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fort {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }
    pub fn center(&self) -> (f64, f64) {
        ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Observability {
    Full,
    Partial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpawnBand {
    pub y0: f64,
    pub y1: f64,
    pub xs: [f64; 3],
    pub jitter: f64,
}

/// Arena is the unit square; all distances are arena units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub max_steps: u32,
    pub velocity: f64,
    pub turn_step: f64,
    pub shoot_range: f64,
    pub shoot_halfwidth: f64,
    /// Kill every opposing agent in the cone, or only the nearest.
    pub single_target_shots: bool,
    /// Steps a shooter must wait between shots (0 = none).
    pub shot_cooldown: u32,
    pub fort: Fort,
    pub forest: Option<Rect>,
    pub observability: Observability,
    pub guard_spawn: SpawnBand,
    pub attacker_spawn: SpawnBand,
    /// Symbolic grid resolution per axis for the reasoner's fine description.
    pub grid_n: u32,
    /// Symbolic region grid per axis (regions of grid_n / region_grid cells).
    pub region_grid: u32,
    /// When set, the domain gains an intercept goal tier: move to the
    /// region of any unshot attacker within this distance of the fort.
    pub intercept_radius: Option<f64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            max_steps: 100,
            velocity: 0.05,
            turn_step: std::f64::consts::FRAC_PI_6,
            shoot_range: 0.25,
            shoot_halfwidth: std::f64::consts::FRAC_PI_6,
            single_target_shots: false,
            shot_cooldown: 0,
            fort: Fort { x: 0.5, y: 0.05, radius: 0.08 },
            forest: None,
            observability: Observability::Full,
            guard_spawn: SpawnBand { y0: 0.10, y1: 0.22, xs: [0.30, 0.50, 0.70], jitter: 0.04 },
            attacker_spawn: SpawnBand { y0: 0.80, y1: 0.95, xs: [0.20, 0.50, 0.80], jitter: 0.06 },
            grid_n: 10,
            region_grid: 5,
            intercept_radius: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("spawn bands overlap (guards {0}..{1}, attackers {2}..{3})")]
    OverlappingSpawnBands(f64, f64, f64, f64),
    #[error("{0}")]
    Invalid(String),
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.guard_spawn;
        let a = &self.attacker_spawn;
        if g.y0 > g.y1 || a.y0 > a.y1 {
            return Err(ConfigError::Invalid("spawn band with y0 > y1".into()));
        }
        if g.y1 >= a.y0 && a.y1 >= g.y0 {
            return Err(ConfigError::OverlappingSpawnBands(g.y0, g.y1, a.y0, a.y1));
        }
        for v in [self.velocity, self.turn_step, self.shoot_range, self.shoot_halfwidth, self.fort.radius] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ConfigError::Invalid("kinematic constants must be positive and finite".into()));
            }
        }
        if self.grid_n == 0 || self.region_grid == 0 || self.grid_n % self.region_grid != 0 {
            return Err(ConfigError::Invalid(
                "region_grid must evenly divide grid_n".into(),
            ));
        }
        if let Some(f) = &self.forest {
            if f.x0 >= f.x1 || f.y0 >= f.y1 {
                return Err(ConfigError::Invalid("degenerate forest rectangle".into()));
            }
        }
        Ok(())
    }

    /// Side length of one symbolic cell.
    pub fn cell_size(&self) -> f64 {
        1.0 / self.grid_n as f64
    }

    /// Cell of a continuous position.
    pub fn cell_of(&self, x: f64, y: f64) -> (i64, i64) {
        let n = self.grid_n as i64;
        let cx = ((x * self.grid_n as f64).floor() as i64).clamp(0, n - 1);
        let cy = ((y * self.grid_n as f64).floor() as i64).clamp(0, n - 1);
        (cx, cy)
    }

    /// Center of a symbolic cell.
    pub fn cell_center(&self, cx: i64, cy: i64) -> (f64, f64) {
        let s = self.cell_size();
        ((cx as f64 + 0.5) * s, (cy as f64 + 0.5) * s)
    }
}
