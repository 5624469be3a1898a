//! Log replay: re-simulate from the header's seed and scenario using the
//! logged actions, verifying the hash chain and bit-identical state.

use crate::fortattack::{Action, WorldState, N_AGENTS};

use super::log::{verify_line, LogLine};

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("line {line}: {message}")]
    Corrupt { line: usize, message: String },
    #[error("step {step}: {message}")]
    Diverged { step: u32, message: String },
    #[error("log is empty or missing its header")]
    NoHeader,
}

/// Returns the number of replayed steps on success.
pub fn replay_log(text: &str) -> Result<u32, ReplayError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((idx0, header_raw)) = lines.next() else {
        return Err(ReplayError::NoHeader);
    };
    let mut chain = verify_line(header_raw, "")
        .map_err(|message| ReplayError::Corrupt { line: idx0 + 1, message })?;
    let header: LogLine = serde_json::from_str(header_raw)
        .map_err(|e| ReplayError::Corrupt { line: idx0 + 1, message: e.to_string() })?;
    let LogLine::Header { seed, scenario, .. } = header else {
        return Err(ReplayError::NoHeader);
    };
    let mut world = WorldState::reset(seed, &scenario)
        .map_err(|e| ReplayError::Corrupt { line: idx0 + 1, message: e.to_string() })?;

    let mut steps = 0u32;
    for (idx, raw) in lines {
        chain = verify_line(raw, &chain)
            .map_err(|message| ReplayError::Corrupt { line: idx + 1, message })?;
        let line: LogLine = serde_json::from_str(raw)
            .map_err(|e| ReplayError::Corrupt { line: idx + 1, message: e.to_string() })?;
        let LogLine::Step { step, agents, outcome, .. } = line else {
            return Err(ReplayError::Corrupt { line: idx + 1, message: "second header".into() });
        };
        let mut joint: [Option<Action>; N_AGENTS] = [None; N_AGENTS];
        for rec in &agents {
            joint[rec.id] = rec.action;
        }
        let got = world
            .step(&joint)
            .map_err(|e| ReplayError::Diverged { step, message: e.to_string() })?;
        if world.step != step {
            return Err(ReplayError::Diverged { step, message: "step counter mismatch".into() });
        }
        for rec in &agents {
            let a = &world.agents[rec.id];
            if a.pose.x != rec.x || a.pose.y != rec.y || a.pose.orientation != rec.o || a.alive != rec.alive
            {
                return Err(ReplayError::Diverged {
                    step,
                    message: format!("agent {} state differs from the log", rec.id),
                });
            }
        }
        if got != outcome {
            return Err(ReplayError::Diverged { step, message: "outcome differs from the log".into() });
        }
        steps = step;
        if got.is_some() {
            break;
        }
    }
    Ok(steps)
}
