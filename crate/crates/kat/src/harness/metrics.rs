//! Batch metrics: outcome tallies, win percentage with a bootstrap CI,
//! prediction accuracy, and paired ablation comparisons.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const BOOTSTRAP_RESAMPLES: u32 = 10_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub format: u32,
    pub ablation: String,
    pub episodes: u64,
    pub config_hash: String,
    pub model_hashes: BTreeMap<String, String>,
    pub outcomes: BTreeMap<String, u64>,
    /// None when the batch is empty (degenerate, flagged by omission).
    pub win_percentage: Option<f64>,
    pub win_ci_95: Option<[f64; 2]>,
    pub mean_episode_length: Option<f64>,
    pub prediction_accuracy: BTreeMap<String, Option<f64>>,
    pub prediction_samples: BTreeMap<String, u64>,
    pub messages_sent: u64,
    pub noplan_steps: u64,
    pub episode_seeds: Vec<u64>,
    /// Per-episode guard wins, in episode order (paired comparisons).
    pub wins: Vec<bool>,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Percentile bootstrap CI for a win fraction, in percentage points.
pub fn bootstrap_win_ci(wins: &[bool], resamples: u32, seed: u64) -> Option<[f64; 2]> {
    if wins.is_empty() {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = wins.len();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| {
            let mut s = 0u32;
            for _ in 0..n {
                if wins[rng.random_range(0..n)] {
                    s += 1;
                }
            }
            s as f64 / n as f64 * 100.0
        })
        .collect();
    means.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lo = means[((resamples as f64 * 0.025) as usize).min(means.len() - 1)];
    let hi = means[((resamples as f64 * 0.975) as usize).min(means.len() - 1)];
    Some([lo, hi])
}

/// Paired bootstrap over per-episode win differences (a - b), percentage
/// points: (mean difference, 2.5th, 97.5th percentile).
pub fn paired_diff_ci(a: &[bool], b: &[bool], resamples: u32, seed: u64) -> (f64, f64, f64) {
    assert_eq!(a.len(), b.len(), "paired batches must share episode seeds");
    assert!(!a.is_empty());
    let diffs: Vec<f64> = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (*x as i8 - *y as i8) as f64 * 100.0)
        .collect();
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = diffs.len();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| {
            let mut s = 0.0;
            for _ in 0..n {
                s += diffs[rng.random_range(0..n)];
            }
            s / n as f64
        })
        .collect();
    means.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lo = means[((resamples as f64 * 0.025) as usize).min(means.len() - 1)];
    let hi = means[((resamples as f64 * 0.975) as usize).min(means.len() - 1)];
    (mean, lo, hi)
}
