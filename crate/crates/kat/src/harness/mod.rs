//! Experiment harness: configuration, batch execution, metrics, episode
//! logs, and replay verification.

mod config;
mod log;
mod metrics;
mod replay;
mod runner;

pub use config::{
    fnv1a64, Ablation, ControllerOverrides, ExperimentConfig, ExperimentError, ExperimentSection,
    ModelPaths, OutputPaths, PolicyAssignment,
};
pub use log::{chain_hash, seal_line, verify_line, AgentRecord, LogLine};
pub use metrics::{bootstrap_win_ci, paired_diff_ci, MetricsReport, BOOTSTRAP_RESAMPLES};
pub use replay::{replay_log, ReplayError};
pub use runner::{load_models, persist_batch, run_batch, run_episode, write_atomic, EpisodeResult, LoadedModels};
