//! `kat` - dataset generation, model training, experiment batches, and
//! log replay for the Fort Attack ad hoc teamwork stack.
//!
//! Exit codes: 0 success; 2 usage errors (clap); 3 unreadable or unwritable
//! files; 4 configuration invariant violations; 5 replay verification
//! failure; 6 malformed data or model files.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use kat::agents::{generate_dataset, PolicyId};
use kat::fftree::{learn_ensemble, read_csv_path, write_csv};
use kat::fortattack::{ScenarioConfig, Team};
use kat::harness::{
    persist_batch, replay_log, run_batch, run_episode, write_atomic, ExperimentConfig,
    ExperimentError,
};

#[derive(Parser)]
#[command(
    name = "kat",
    version,
    about = "Fort Attack ad hoc teamwork: datasets, models, experiments, replay",
    long_about = "Dataset generation, fast-and-frugal model training, experiment batches, \
and bit-exact log replay.\n\nExit codes: 0 success; 2 usage errors; 3 unreadable or \
unwritable files; 4 configuration invariant violations; 5 replay verification failure; \
6 malformed data or model files."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Role {
    Guard,
    Attacker,
}

impl Role {
    fn team(self) -> Team {
        match self {
            Role::Guard => Team::Guard,
            Role::Attacker => Team::Attacker,
        }
    }
    fn name(self) -> &'static str {
        match self {
            Role::Guard => "guard",
            Role::Attacker => "attacker",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run scripted full-observability episodes and write a labeled CSV
    /// dataset of (state features, executed action) rows.
    GenerateData {
        /// Scripted policy driving all six agents.
        #[arg(long)]
        policy: String,
        /// Which team's rows to collect.
        #[arg(long, value_enum, default_value = "guard")]
        role: Role,
        #[arg(long)]
        episodes: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Induce a fast-and-frugal ensemble from a dataset CSV.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// Agent role label stored in the model file.
        #[arg(long, value_enum)]
        role: Role,
        #[arg(long)]
        out: PathBuf,
        /// Maximum tree levels (leaves stay bounded by the attribute count).
        #[arg(long, default_value_t = 16)]
        max_levels: usize,
    },
    /// Run a single episode of an experiment config and print its outcome.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Episode index within the batch (fixes the derived seed).
        #[arg(long, default_value_t = 0)]
        episode: u64,
        /// Write the episode log here.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Run a full experiment batch and write the metrics report.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        report: PathBuf,
        /// Directory for per-episode JSON-lines logs.
        #[arg(long)]
        logs: Option<PathBuf>,
    },
    /// Re-simulate a log from its header and verify bit-identity.
    Replay {
        #[arg(long)]
        log: PathBuf,
    },
}

fn config_exit_code(e: &ExperimentError) -> u8 {
    match e {
        ExperimentError::Io(_) => 3,
        ExperimentError::Invalid(_) | ExperimentError::UnknownPolicy(_) | ExperimentError::Toml(_) => 4,
        ExperimentError::Model(..) => 6,
        ExperimentError::Sim(_) | ExperimentError::Reason(_) => 4,
    }
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::GenerateData { policy, role, episodes, seed, out } => {
            let Some(policy) = PolicyId::parse(&policy) else {
                return fail(4, format!("unknown policy id `{policy}`"));
            };
            let scenario = ScenarioConfig::default();
            let data = match generate_dataset(policy, role.team(), episodes, seed, &scenario) {
                Ok(d) => d,
                Err(e) => return fail(4, e),
            };
            let mut buf = Vec::new();
            if let Err(e) = write_csv(&mut buf, &data) {
                return fail(6, e);
            }
            if let Err(e) = write_atomic(&out, &buf) {
                return fail(3, e);
            }
            println!("wrote {} rows to {}", data.rows.len(), out.display());
            ExitCode::SUCCESS
        }
        Command::Train { data, role, out, max_levels } => {
            let dataset = match read_csv_path(&data) {
                Ok(d) => d,
                Err(kat::fftree::DatasetError::Io(e)) => return fail(3, e),
                Err(e) => return fail(6, e),
            };
            if dataset.rows.is_empty() {
                return fail(6, "dataset has no rows");
            }
            let ensemble = learn_ensemble(&dataset.rows, role.name(), max_levels);
            if let Err(e) = write_atomic(&out, ensemble.to_json().as_bytes()) {
                return fail(3, e);
            }
            println!("trained {} model on {} rows -> {}", role.name(), dataset.rows.len(), out.display());
            ExitCode::SUCCESS
        }
        Command::Run { config, episode, log } => {
            let cfg = match ExperimentConfig::from_path(&config) {
                Ok(c) => c,
                Err(e) => return fail(config_exit_code(&e), e),
            };
            let models = match kat::harness::load_models(&cfg) {
                Ok(m) => m,
                Err(e) => return fail(config_exit_code(&e), e),
            };
            let domain = match kat::agents::fortattack_domain(&cfg.scenario) {
                Ok(d) => d,
                Err(e) => return fail(4, e),
            };
            let theory = match kat::reasoner::ground(&domain) {
                Ok(t) => std::sync::Arc::new(t),
                Err(e) => return fail(4, e),
            };
            let hash = kat::harness::fnv1a64(cfg.canonical().as_bytes());
            let ep = match run_episode(&cfg, &theory, &models, &hash, episode) {
                Ok(ep) => ep,
                Err(e) => return fail(4, e),
            };
            println!(
                "episode {} (seed {}): {:?} after {} steps; {} message(s)",
                ep.episode, ep.seed, ep.outcome, ep.steps, ep.messages
            );
            if let Some(path) = log {
                if let Err(e) = write_atomic(&path, (ep.log.join("\n") + "\n").as_bytes()) {
                    return fail(3, e);
                }
                println!("log written to {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Command::Evaluate { config, report, logs } => {
            let mut cfg = match ExperimentConfig::from_path(&config) {
                Ok(c) => c,
                Err(e) => return fail(config_exit_code(&e), e),
            };
            cfg.output.report = Some(report.clone());
            if logs.is_some() {
                cfg.output.logs_dir = logs;
            }
            let (metrics, episodes) = match run_batch(&cfg) {
                Ok(r) => r,
                Err(e) => return fail(config_exit_code(&e), e),
            };
            if let Err(e) = persist_batch(&cfg, &metrics, &episodes) {
                return fail(3, e);
            }
            match metrics.win_percentage {
                Some(w) => println!(
                    "{}: {} episodes, guards win {:.1}% (95% CI {:?})",
                    metrics.ablation, metrics.episodes, w, metrics.win_ci_95
                ),
                None => println!("{}: empty batch (win percentage undefined)", metrics.ablation),
            }
            println!("report written to {}", report.display());
            ExitCode::SUCCESS
        }
        Command::Replay { log } => {
            let text = match std::fs::read_to_string(&log) {
                Ok(t) => t,
                Err(e) => return fail(3, e),
            };
            match replay_log(&text) {
                Ok(steps) => {
                    println!("identical: {steps} steps re-simulated bit-exactly");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(5, e),
            }
        }
    }
}
