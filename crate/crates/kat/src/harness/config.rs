//! Experiment configuration (TOML) and the ablation switchboard.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{ControllerConfig, PolicyId, SelectionMode};
use crate::fortattack::{Observability, ScenarioConfig};
use crate::modelsel::PenaltyMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ablation {
    Kat,
    Base1,
    Base2,
    Base3,
    Base4,
    Base5,
    Base6,
}

impl Ablation {
    pub fn name(self) -> &'static str {
        match self {
            Ablation::Kat => "kat",
            Ablation::Base1 => "base1",
            Ablation::Base2 => "base2",
            Ablation::Base3 => "base3",
            Ablation::Base4 => "base4",
            Ablation::Base5 => "base5",
            Ablation::Base6 => "base6",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicyAssignment {
    /// Random mix drawn per episode per agent when non-empty.
    pub mix: Vec<String>,
    /// Fixed assignment otherwise.
    pub guards: Option<String>,
    pub attackers: Option<String>,
    pub honor_comm_probability: f64,
}

impl Default for PolicyAssignment {
    fn default() -> Self {
        PolicyAssignment {
            mix: Vec::new(),
            guards: None,
            attackers: None,
            honor_comm_probability: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ControllerOverrides {
    pub coarse_horizon: u32,
    pub fine_horizon: u32,
    pub revise_every: u32,
    pub novelty_threshold: f64,
    pub novelty_streak: u32,
    pub min_learn_rows: usize,
    pub buffer_capacity: usize,
    pub max_levels: usize,
}

impl Default for ControllerOverrides {
    fn default() -> Self {
        let d = ControllerConfig::default();
        ControllerOverrides {
            coarse_horizon: d.coarse_horizon,
            fine_horizon: d.fine_horizon,
            revise_every: d.revise_every,
            novelty_threshold: d.novelty_threshold,
            novelty_streak: d.novelty_streak,
            min_learn_rows: d.min_learn_rows,
            buffer_capacity: d.buffer_capacity,
            max_levels: d.max_levels,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct ModelPaths {
    pub guard: Vec<PathBuf>,
    pub attacker: Vec<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct OutputPaths {
    pub report: Option<PathBuf>,
    pub logs_dir: Option<PathBuf>,
    /// Include per-step controller traces in episode logs.
    pub trace: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSection {
    pub ablation: Ablation,
    pub episodes: u64,
    pub seed: u64,
    #[serde(default)]
    pub comm: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub policies: PolicyAssignment,
    #[serde(default)]
    pub models: ModelPaths,
    #[serde(default)]
    pub controller: ControllerOverrides,
    #[serde(default)]
    pub output: OutputPaths,
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config: {0}")]
    Invalid(String),
    #[error("unknown policy id `{0}`")]
    UnknownPolicy(String),
    #[error("model file {0}: {1}")]
    Model(String, String),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Sim(#[from] crate::fortattack::SimError),
    #[error("{0}")]
    Reason(String),
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<ExperimentConfig, ExperimentError> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parse a config file; relative model and output paths resolve against
    /// the file's directory.
    pub fn from_path(path: &std::path::Path) -> Result<ExperimentConfig, ExperimentError> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(dir) = path.parent() {
            let anchor = |p: &mut PathBuf| {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            };
            for p in cfg.models.guard.iter_mut().chain(cfg.models.attacker.iter_mut()) {
                anchor(p);
            }
            if let Some(p) = cfg.output.report.as_mut() {
                anchor(p);
            }
            if let Some(p) = cfg.output.logs_dir.as_mut() {
                anchor(p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.scenario
            .validate()
            .map_err(|e| ExperimentError::Invalid(e.to_string()))?;
        let a = self.experiment.ablation;
        if matches!(a, Ablation::Base5 | Ablation::Base6) {
            if self.experiment.comm {
                return Err(ExperimentError::Invalid(format!(
                    "{} runs without communication actions",
                    a.name()
                )));
            }
            if self.scenario.observability != Observability::Partial {
                return Err(ExperimentError::Invalid(format!(
                    "{} requires partial observability",
                    a.name()
                )));
            }
        }
        if self.experiment.comm && self.scenario.observability != Observability::Partial {
            return Err(ExperimentError::Invalid(
                "communication only applies under partial observability".into(),
            ));
        }
        for p in self.policy_ids()? {
            let _ = p;
        }
        if self.policies.mix.is_empty()
            && (self.policies.guards.is_none() || self.policies.attackers.is_none())
        {
            return Err(ExperimentError::Invalid(
                "policies need either a mix or fixed guards/attackers ids".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.policies.honor_comm_probability) {
            return Err(ExperimentError::Invalid("honor_comm_probability must be in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn policy_ids(&self) -> Result<Vec<PolicyId>, ExperimentError> {
        let mut out = Vec::new();
        for s in &self.policies.mix {
            out.push(PolicyId::parse(s).ok_or_else(|| ExperimentError::UnknownPolicy(s.clone()))?);
        }
        for s in [&self.policies.guards, &self.policies.attackers].into_iter().flatten() {
            out.push(PolicyId::parse(s).ok_or_else(|| ExperimentError::UnknownPolicy(s.clone()))?);
        }
        Ok(out)
    }

    /// The controller configuration this ablation mandates.
    pub fn controller_config(&self) -> ControllerConfig {
        let o = &self.controller;
        let mut c = ControllerConfig {
            coarse_horizon: o.coarse_horizon,
            fine_horizon: o.fine_horizon,
            revise_every: o.revise_every,
            novelty_threshold: o.novelty_threshold,
            novelty_streak: o.novelty_streak,
            min_learn_rows: o.min_learn_rows,
            buffer_capacity: o.buffer_capacity,
            max_levels: o.max_levels,
            comm_enabled: self.experiment.comm,
            ..ControllerConfig::default()
        };
        match self.experiment.ablation {
            Ablation::Kat => {
                c.selection = SelectionMode::On(PenaltyMode::Graded);
                c.revision_enabled = true;
            }
            Ablation::Base1 | Ablation::Base3 => {
                c.selection = SelectionMode::Off;
                c.revision_enabled = false;
            }
            Ablation::Base2 | Ablation::Base4 => {
                c.selection = SelectionMode::On(PenaltyMode::Fixed);
                c.revision_enabled = true;
            }
            Ablation::Base5 | Ablation::Base6 => {
                c.selection = SelectionMode::On(PenaltyMode::Graded);
                c.revision_enabled = true;
                c.comm_enabled = false;
            }
        }
        c
    }

    /// Canonical serialization used for provenance hashing.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// FNV-1a 64-bit hash, hex-encoded; stable provenance fingerprint.
pub fn fnv1a64(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}
