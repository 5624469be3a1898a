//! Episode and batch execution.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::agents::{
    derive_seed, fortattack_domain, AdHocController, Message, PolicyId, ScriptedPolicy,
};
use crate::fftree::FFEnsemble;
use crate::fortattack::{Action, Outcome, Team, WorldState, ADHOC_ID, N_AGENTS};
use crate::reasoner::{ground, GroundTheory};

use super::config::{fnv1a64, ExperimentConfig, ExperimentError};
use super::log::{seal_line, AgentRecord, LogLine};
use super::metrics::{bootstrap_win_ci, MetricsReport, BOOTSTRAP_RESAMPLES};

pub struct LoadedModels {
    pub guard: Vec<FFEnsemble>,
    pub attacker: Vec<FFEnsemble>,
    pub hashes: BTreeMap<String, String>,
}

/// Load and fingerprint every referenced model file; fails before any
/// episode runs.
pub fn load_models(cfg: &ExperimentConfig) -> Result<LoadedModels, ExperimentError> {
    let mut hashes = BTreeMap::new();
    let mut load = |paths: &[std::path::PathBuf]| -> Result<Vec<FFEnsemble>, ExperimentError> {
        let mut out = Vec::new();
        for p in paths {
            let text = std::fs::read_to_string(p)
                .map_err(|e| ExperimentError::Model(p.display().to_string(), e.to_string()))?;
            hashes.insert(p.display().to_string(), fnv1a64(text.as_bytes()));
            out.push(
                FFEnsemble::from_json(&text)
                    .map_err(|e| ExperimentError::Model(p.display().to_string(), e.to_string()))?,
            );
        }
        Ok(out)
    };
    let guard = load(&cfg.models.guard)?;
    let attacker = load(&cfg.models.attacker)?;
    if guard.is_empty() || attacker.is_empty() {
        return Err(ExperimentError::Invalid(
            "both guard and attacker model libraries need at least one model file".into(),
        ));
    }
    Ok(LoadedModels { guard, attacker, hashes })
}

#[derive(Debug, Clone)]
pub struct EpisodeResult {
    pub episode: u64,
    pub seed: u64,
    pub outcome: Outcome,
    pub steps: u32,
    pub log: Vec<String>,
    /// (role, predicted action, actual action) per scored round.
    pub pred_pairs: Vec<(Team, u8, u8)>,
    pub messages: u64,
    pub noplan_steps: u64,
    pub selection_flips: u64,
    pub novelty_events: u64,
    /// Attackers that died in the ad hoc agent's cone on its shot steps.
    pub aha_kills: u64,
}

/// Drive one full episode: the ad hoc controller in guard slot 0, scripted
/// policies everywhere else, messages delivered with one step of latency.
pub fn run_episode(
    cfg: &ExperimentConfig,
    theory: &Arc<GroundTheory>,
    models: &LoadedModels,
    config_hash: &str,
    episode: u64,
) -> Result<EpisodeResult, ExperimentError> {
    let master = cfg.experiment.seed;
    let seed = derive_seed(master, episode, 0xE);
    let scenario = &cfg.scenario;
    let mut world = WorldState::reset(seed, scenario)?;

    // Per-episode policy draw for the scripted agents.
    let mix: Vec<PolicyId> = cfg
        .policies
        .mix
        .iter()
        .map(|s| PolicyId::parse(s).expect("validated"))
        .collect();
    let mut draw_rng = ChaCha8Rng::seed_from_u64(derive_seed(master, episode, 0xA11));
    let fixed_guard = cfg.policies.guards.as_deref().and_then(PolicyId::parse);
    let fixed_attacker = cfg.policies.attackers.as_deref().and_then(PolicyId::parse);
    let mut assigned: Vec<PolicyId> = Vec::with_capacity(N_AGENTS);
    for id in 0..N_AGENTS {
        let p = if !mix.is_empty() {
            mix[draw_rng.random_range(0..mix.len())]
        } else if id < 3 {
            fixed_guard.expect("validated fixed assignment")
        } else {
            fixed_attacker.expect("validated fixed assignment")
        };
        assigned.push(p);
    }

    let mut scripted: Vec<Option<ScriptedPolicy>> = (0..N_AGENTS)
        .map(|id| {
            if id == ADHOC_ID {
                None
            } else {
                Some(ScriptedPolicy::new(
                    assigned[id],
                    id,
                    derive_seed(master, episode, id as u64),
                    cfg.policies.honor_comm_probability,
                    scenario,
                ))
            }
        })
        .collect();

    let mut controller = AdHocController::new(
        Arc::clone(theory),
        scenario.clone(),
        cfg.controller_config(),
        models.guard.clone(),
        models.attacker.clone(),
    );

    let mut log: Vec<String> = Vec::new();
    let mut chain = String::new();
    let header = LogLine::Header {
        format: 1,
        episode,
        seed,
        ablation: cfg.experiment.ablation.name().to_string(),
        policies: (0..N_AGENTS)
            .map(|id| if id == ADHOC_ID { "kat".to_string() } else { assigned[id].name().to_string() })
            .collect(),
        config_hash: config_hash.to_string(),
        scenario: scenario.clone(),
        h: String::new(),
    };
    let (line, h) = seal_line(serde_json::to_value(&header).unwrap(), &chain);
    chain = h;
    log.push(line);

    let mut inbox: Vec<Option<Message>> = vec![None; N_AGENTS];
    let mut pred_pairs: Vec<(Team, u8, u8)> = Vec::new();
    let mut messages = 0u64;
    let mut noplan_steps = 0u64;
    let mut selection_flips = 0u64;
    let mut novelty_events = 0u64;
    let mut aha_kills = 0u64;
    let mut last_selected: Option<Vec<(usize, usize)>> = None;

    let outcome = loop {
        let mut joint: [Option<Action>; N_AGENTS] = [None; N_AGENTS];
        let mut next_inbox: Vec<Option<Message>> = vec![None; N_AGENTS];
        let mut trace = None;
        let mut step_predictions: Vec<(usize, u8)> = Vec::new();

        for id in 0..N_AGENTS {
            if !world.agents[id].alive {
                continue;
            }
            let obs = world.observe(id, scenario.observability)?;
            if id == ADHOC_ID {
                let (action, message) = controller.act(&obs);
                joint[id] = Some(action);
                if let Some(m) = message {
                    messages += 1;
                    next_inbox[m.recipient] = Some(m);
                }
                if controller.last_trace.noplan_fallback {
                    noplan_steps += 1;
                }
                if cfg.output.trace {
                    trace = Some(controller.last_trace.clone());
                }
                novelty_events += controller.last_trace.novelty.len() as u64;
                let sel = controller.last_trace.selected.clone();
                if let Some(prev) = &last_selected {
                    selection_flips += sel
                        .iter()
                        .filter(|(a, m)| prev.iter().any(|(pa, pm)| pa == a && pm != m))
                        .count() as u64;
                }
                last_selected = Some(sel);
                step_predictions = controller.last_trace.predicted.clone();
            } else {
                let policy = scripted[id].as_mut().expect("scripted slot");
                joint[id] = Some(policy.act(&obs, inbox[id].as_ref(), scenario));
            }
        }

        // Predictions are for this simultaneous step; join with the truth.
        for (agent, predicted) in step_predictions {
            if let Some(actual) = joint[agent] {
                pred_pairs.push((world.agents[agent].team, predicted, actual.id()));
            }
        }

        let pre_alive: Vec<bool> = world.agents.iter().map(|a| a.alive).collect();
        let outcome = world.step(&joint)?;
        if joint[ADHOC_ID] == Some(Action::Shoot) {
            for a in &world.agents {
                if a.team == Team::Attacker && pre_alive[a.id] && !a.alive {
                    let me = &world.agents[ADHOC_ID];
                    if crate::fortattack::in_shooting_range(me, a, scenario) {
                        aha_kills += 1;
                    }
                }
            }
        }
        let record = LogLine::Step {
            step: world.step,
            agents: world
                .agents
                .iter()
                .enumerate()
                .map(|(i, a)| AgentRecord {
                    id: a.id,
                    x: a.pose.x,
                    y: a.pose.y,
                    o: a.pose.orientation,
                    alive: a.alive,
                    action: joint[i],
                })
                .collect(),
            outcome,
            trace: trace.take(),
            h: String::new(),
        };
        let (line, h) = seal_line(serde_json::to_value(&record).unwrap(), &chain);
        chain = h;
        log.push(line);

        inbox = next_inbox;
        if let Some(o) = outcome {
            break o;
        }
    };

    Ok(EpisodeResult {
        episode,
        seed,
        outcome,
        steps: world.step,
        log,
        pred_pairs,
        messages,
        noplan_steps,
        selection_flips,
        novelty_events,
        aha_kills,
    })
}

/// Run the whole batch (episodes in parallel, `KAT_THREADS` caps workers)
/// and aggregate the report.
pub fn run_batch(cfg: &ExperimentConfig) -> Result<(MetricsReport, Vec<EpisodeResult>), ExperimentError> {
    cfg.validate()?;
    let models = load_models(cfg)?;
    let domain = fortattack_domain(&cfg.scenario)
        .map_err(|e| ExperimentError::Invalid(format!("domain generation: {e}")))?;
    let theory = Arc::new(ground(&domain).map_err(|e| ExperimentError::Reason(e.to_string()))?);
    let config_hash = fnv1a64(cfg.canonical().as_bytes());

    let threads = std::env::var("KAT_THREADS").ok().and_then(|s| s.parse::<usize>().ok());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| ExperimentError::Invalid(e.to_string()))?;

    let episodes: Result<Vec<EpisodeResult>, ExperimentError> = pool.install(|| {
        use rayon::prelude::*;
        (0..cfg.experiment.episodes)
            .into_par_iter()
            .map(|ep| run_episode(cfg, &theory, &models, &config_hash, ep))
            .collect()
    });
    let episodes = episodes?;

    let report = aggregate(cfg, &config_hash, &models, &episodes);
    Ok((report, episodes))
}

fn aggregate(
    cfg: &ExperimentConfig,
    config_hash: &str,
    models: &LoadedModels,
    episodes: &[EpisodeResult],
) -> MetricsReport {
    let mut outcomes: BTreeMap<String, u64> = BTreeMap::new();
    let mut wins = Vec::with_capacity(episodes.len());
    let mut steps_total = 0u64;
    let mut messages = 0u64;
    let mut noplan = 0u64;
    let mut pred_hits: BTreeMap<&'static str, (u64, u64)> = BTreeMap::new();
    for ep in episodes {
        let key = serde_json::to_value(ep.outcome)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_else(|| format!("{:?}", ep.outcome));
        *outcomes.entry(key).or_insert(0) += 1;
        wins.push(ep.outcome.guards_win());
        steps_total += ep.steps as u64;
        messages += ep.messages;
        noplan += ep.noplan_steps;
        for (role, predicted, actual) in &ep.pred_pairs {
            let k = match role {
                Team::Guard => "guard",
                Team::Attacker => "attacker",
            };
            for key in [k, "overall"] {
                let e = pred_hits.entry(key).or_insert((0, 0));
                e.1 += 1;
                if predicted == actual {
                    e.0 += 1;
                }
            }
        }
    }
    let n = episodes.len() as u64;
    let win_count = wins.iter().filter(|w| **w).count() as f64;
    let mut prediction_accuracy = BTreeMap::new();
    let mut prediction_samples = BTreeMap::new();
    for key in ["guard", "attacker", "overall"] {
        let (hit, total) = pred_hits.get(key).copied().unwrap_or((0, 0));
        prediction_accuracy.insert(
            key.to_string(),
            if total > 0 { Some(hit as f64 / total as f64 * 100.0) } else { None },
        );
        prediction_samples.insert(key.to_string(), total);
    }
    MetricsReport {
        format: 1,
        ablation: cfg.experiment.ablation.name().to_string(),
        episodes: n,
        config_hash: config_hash.to_string(),
        model_hashes: models.hashes.clone(),
        outcomes,
        win_percentage: if n > 0 { Some(win_count / n as f64 * 100.0) } else { None },
        win_ci_95: bootstrap_win_ci(&wins, BOOTSTRAP_RESAMPLES, cfg.experiment.seed ^ 0xB007),
        mean_episode_length: if n > 0 { Some(steps_total as f64 / n as f64) } else { None },
        prediction_accuracy,
        prediction_samples,
        messages_sent: messages,
        noplan_steps: noplan,
        episode_seeds: episodes.iter().map(|e| e.seed).collect(),
        wins,
    }
}

/// Write bytes via a temp file and rename, creating parent directories.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}

/// Persist a batch: report JSON and one JSONL log per episode.
pub fn persist_batch(
    cfg: &ExperimentConfig,
    report: &MetricsReport,
    episodes: &[EpisodeResult],
) -> Result<(), ExperimentError> {
    if let Some(report_path) = &cfg.output.report {
        write_atomic(report_path, report.to_json().as_bytes())?;
    }
    if let Some(dir) = &cfg.output.logs_dir {
        std::fs::create_dir_all(dir)?;
        for ep in episodes {
            let path = dir.join(format!("episode-{:04}.jsonl", ep.episode));
            write_atomic(&path, (ep.log.join("\n") + "\n").as_bytes())?;
        }
    }
    Ok(())
}
