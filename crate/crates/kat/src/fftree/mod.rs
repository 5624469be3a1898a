//! Fast-and-frugal behavior models: one binary tree per action, arbitrated
//! by earliest exit. Trees are immutable values; learning and revision
//! build new ones.

mod dataset;
mod features;
mod learn;

pub use dataset::{read_csv, read_csv_path, write_csv, DatasetError, LabeledDataset, Provenance};
pub use features::{featurize, FeatureError, FeatureVector, FEATURE_NAMES, N_FEATURES, NO_ATTACKER_DIST};
pub use learn::{best_split, learn_ensemble, learn_tree, Split, MAX_LEVELS};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One level: test a single attribute against a threshold; one side exits
/// with a binary label, the other continues.
#[derive(Debug, Clone, PartialEq)]
pub struct FFLevel {
    pub attribute: usize,
    pub threshold: f64,
    /// Exit on the `value <= threshold` side (else on the `>` side).
    pub exit_on_le: bool,
    /// `true` = fire (this action predicted), `false` = pass.
    pub exit_label: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FFTree {
    pub action_id: u8,
    pub levels: Vec<FFLevel>,
    pub final_label: bool,
}

impl FFTree {
    /// Leaf count of a fast-and-frugal structure: one exit per level plus
    /// the final leaf.
    pub fn leaves(&self) -> usize {
        self.levels.len() + 1
    }
}

/// Per-action trees plus empirical action priors for one agent type.
#[derive(Debug, Clone, PartialEq)]
pub struct FFEnsemble {
    pub agent_type: String,
    pub trees: Vec<FFTree>,
    pub priors: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unsupported model format {0} (expected 1)")]
    Format(u32),
    #[error("malformed model file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

// ---- serialized form (format 1) ----------------------------------------

#[derive(Serialize, Deserialize)]
struct LevelDoc {
    attribute: usize,
    threshold: f64,
    comparison: String, // "le" exits on <=, "gt" exits on >
    exit: String,       // "fire" | "pass"
}

#[derive(Serialize, Deserialize)]
struct TreeDoc {
    action: u8,
    levels: Vec<LevelDoc>,
    #[serde(rename = "final")]
    final_label: String,
}

#[derive(Serialize, Deserialize)]
struct EnsembleDoc {
    format: u32,
    agent_type: String,
    priors: Vec<f64>,
    trees: Vec<TreeDoc>,
}

fn label_str(fire: bool) -> String {
    if fire { "fire" } else { "pass" }.to_string()
}

fn parse_label(s: &str) -> Result<bool, ModelError> {
    match s {
        "fire" => Ok(true),
        "pass" => Ok(false),
        other => Err(ModelError::Malformed(format!("unknown label `{other}`"))),
    }
}

impl FFEnsemble {
    pub fn to_json(&self) -> String {
        let doc = EnsembleDoc {
            format: 1,
            agent_type: self.agent_type.clone(),
            priors: self.priors.clone(),
            trees: self
                .trees
                .iter()
                .map(|t| TreeDoc {
                    action: t.action_id,
                    levels: t
                        .levels
                        .iter()
                        .map(|l| LevelDoc {
                            attribute: l.attribute,
                            threshold: l.threshold,
                            comparison: if l.exit_on_le { "le" } else { "gt" }.to_string(),
                            exit: label_str(l.exit_label),
                        })
                        .collect(),
                    final_label: label_str(t.final_label),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<FFEnsemble, ModelError> {
        let doc: EnsembleDoc = serde_json::from_str(text)?;
        if doc.format != 1 {
            return Err(ModelError::Format(doc.format));
        }
        let mut trees = Vec::with_capacity(doc.trees.len());
        for t in doc.trees {
            let mut levels = Vec::with_capacity(t.levels.len());
            for l in t.levels {
                if l.attribute >= N_FEATURES {
                    return Err(ModelError::Malformed(format!("attribute {} out of range", l.attribute)));
                }
                levels.push(FFLevel {
                    attribute: l.attribute,
                    threshold: l.threshold,
                    exit_on_le: match l.comparison.as_str() {
                        "le" => true,
                        "gt" => false,
                        other => {
                            return Err(ModelError::Malformed(format!("unknown comparison `{other}`")))
                        }
                    },
                    exit_label: parse_label(&l.exit)?,
                });
            }
            trees.push(FFTree { action_id: t.action, levels, final_label: parse_label(&t.final_label)? });
        }
        Ok(FFEnsemble { agent_type: doc.agent_type, trees, priors: doc.priors })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(vals: &[(usize, f64)], action: u8) -> (FeatureVector, u8) {
        let mut f = [0.0; N_FEATURES];
        for (i, v) in vals {
            f[*i] = *v;
        }
        (FeatureVector(f), action)
    }

    /// Separable fixture: action 7 fires iff attribute 30 (fort distance)
    /// is <= 0.2, else action 6.
    fn separable(n: usize) -> Vec<(FeatureVector, u8)> {
        (0..n)
            .map(|i| {
                let d = i as f64 / n as f64 * 0.6;
                row(&[(30, d)], if d <= 0.2 { 7 } else { 6 })
            })
            .collect()
    }

    #[test]
    fn one_level_tree_on_separable_data() {
        let rows = separable(200);
        let tree = learn_tree(&rows, 7, 10);
        assert_eq!(tree.levels.len(), 1);
        assert_eq!(tree.levels[0].attribute, 30);
        // Perfect training accuracy by replay.
        for (f, a) in &rows {
            let (fires, _) = tree.classify(f);
            assert_eq!(fires, *a == 7);
        }
    }

    #[test]
    fn single_class_data_gets_depth_zero_tree() {
        let rows: Vec<_> = (0..50).map(|i| row(&[(0, i as f64)], 3)).collect();
        let tree = learn_tree(&rows, 3, 10);
        assert!(tree.levels.is_empty());
        assert!(tree.final_label);
        let off = learn_tree(&rows, 4, 10);
        assert!(off.levels.is_empty());
        assert!(!off.final_label);
    }

    #[test]
    fn first_split_matches_exhaustive_oracle_on_noisy_fixture() {
        // Noisy: attribute 5 separates at 0.35 except for a few flipped rows.
        let mut rows = Vec::new();
        for i in 0..300usize {
            let v = i as f64 / 300.0;
            let mut a = if v <= 0.35 { 2 } else { 1 };
            if i % 37 == 0 {
                a = 3 - a;
            }
            rows.push(row(&[(5, v), (8, (i % 7) as f64)], a));
        }
        let label: Vec<bool> = rows.iter().map(|(_, a)| *a == 2).collect();
        let pool: Vec<usize> = (0..rows.len()).collect();

        // Naive oracle: recount the confusion for every candidate pair.
        let mut best: Option<(f64, usize, f64)> = None;
        for attr in 0..N_FEATURES {
            let mut vals: Vec<f64> = pool.iter().map(|&r| rows[r].0.get(attr)).collect();
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            vals.dedup();
            for w in vals.windows(2) {
                let th = (w[0] + w[1]) / 2.0;
                let le: Vec<usize> = pool.iter().copied().filter(|&r| rows[r].0.get(attr) <= th).collect();
                let gt: Vec<usize> = pool.iter().copied().filter(|&r| rows[r].0.get(attr) > th).collect();
                let pos_le = le.iter().filter(|&&r| label[r]).count();
                let pos_gt = gt.iter().filter(|&&r| label[r]).count();
                let lab_le = pos_le > le.len() - pos_le;
                let lab_gt = pos_gt > gt.len() - pos_gt;
                let (mut tp, mut fn_, mut tn, mut fp) = (0usize, 0, 0, 0);
                if lab_le {
                    tp += pos_le;
                    fp += le.len() - pos_le;
                } else {
                    tn += le.len() - pos_le;
                    fn_ += pos_le;
                }
                if lab_gt {
                    tp += pos_gt;
                    fp += gt.len() - pos_gt;
                } else {
                    tn += gt.len() - pos_gt;
                    fn_ += pos_gt;
                }
                let tpr = if tp + fn_ > 0 { tp as f64 / (tp + fn_) as f64 } else { 1.0 };
                let tnr = if tn + fp > 0 { tn as f64 / (tn + fp) as f64 } else { 1.0 };
                let ba = (tpr + tnr) / 2.0;
                if best.map(|(b, _, _)| ba > b).unwrap_or(true) {
                    best = Some((ba, attr, th));
                }
            }
        }
        let (oba, oattr, oth) = best.unwrap();
        let s = best_split(&pool, |r, a| rows[r].0.get(a), &label).unwrap();
        assert_eq!(s.attribute, oattr);
        assert!((s.threshold - oth).abs() < 1e-12);
        assert!((s.balanced_accuracy - oba).abs() < 1e-12);
    }

    #[test]
    fn ensemble_has_a_tree_per_action_and_priors_sum_to_one() {
        let rows = separable(100);
        let e = learn_ensemble(&rows, "guard", 8);
        assert_eq!(e.trees.len(), 8);
        let sum: f64 = e.priors.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        // Unseen actions got constant-pass trees with zero prior.
        assert!(e.trees[0].levels.is_empty());
        assert!(!e.trees[0].final_label);
        assert_eq!(e.priors[0], 0.0);
    }

    #[test]
    fn uniform_two_action_priors_are_half() {
        let rows: Vec<_> = (0..100)
            .map(|i| row(&[(0, i as f64)], if i % 2 == 0 { 1 } else { 2 }))
            .collect();
        let e = learn_ensemble(&rows, "guard", 4);
        assert_eq!(e.priors[1], 0.5);
        assert_eq!(e.priors[2], 0.5);
    }

    #[test]
    fn predict_prefers_shallowest_fire() {
        // Tree for action 1 exits at depth 0; tree for action 2 at depth 2.
        let t1 = FFTree {
            action_id: 1,
            levels: vec![FFLevel { attribute: 0, threshold: 0.5, exit_on_le: true, exit_label: true }],
            final_label: false,
        };
        let t2 = FFTree {
            action_id: 2,
            levels: vec![
                FFLevel { attribute: 1, threshold: 10.0, exit_on_le: false, exit_label: false },
                FFLevel { attribute: 2, threshold: 10.0, exit_on_le: false, exit_label: false },
                FFLevel { attribute: 0, threshold: 0.5, exit_on_le: true, exit_label: true },
            ],
            final_label: false,
        };
        let mut trees: Vec<FFTree> = (0..8)
            .map(|a| FFTree { action_id: a, levels: Vec::new(), final_label: false })
            .collect();
        trees[1] = t1;
        trees[2] = t2;
        let e = FFEnsemble { agent_type: "guard".into(), trees, priors: vec![0.125; 8] };
        let f = FeatureVector([0.0; N_FEATURES]);
        assert_eq!(e.predict(&f), 1);
    }

    #[test]
    fn predict_falls_back_to_highest_prior() {
        let trees: Vec<FFTree> = (0..8)
            .map(|a| FFTree { action_id: a, levels: Vec::new(), final_label: false })
            .collect();
        let mut priors = vec![0.05; 8];
        priors[6] = 0.65; // noop-heavy
        let e = FFEnsemble { agent_type: "guard".into(), trees, priors };
        assert_eq!(e.predict(&FeatureVector([0.0; N_FEATURES])), 6);
    }

    #[test]
    fn single_firing_tree_wins() {
        let mut trees: Vec<FFTree> = (0..8)
            .map(|a| FFTree { action_id: a, levels: Vec::new(), final_label: false })
            .collect();
        trees[5].final_label = true;
        let e = FFEnsemble { agent_type: "guard".into(), trees, priors: vec![0.125; 8] };
        assert_eq!(e.predict(&FeatureVector([0.0; N_FEATURES])), 5);
    }

    #[test]
    fn revise_is_value_semantic_and_ignores_small_buffers() {
        let rows = separable(100);
        let e = learn_ensemble(&rows, "guard", 8);
        let before = e.clone();
        let revised = e.revise(&rows[..5], 20);
        assert_eq!(e, before);
        assert_eq!(revised, before);
    }

    #[test]
    fn revise_tracks_a_shifted_threshold() {
        let rows = separable(400); // boundary at 0.2 on attribute 30
        let e = learn_ensemble(&rows, "guard", 8);
        let base_th = e.trees[7].levels[0].threshold;
        assert!((base_th - 0.2).abs() < 0.01);
        // Shifted buffer: boundary moves to 0.3.
        let buffer: Vec<_> = (0..400usize)
            .map(|i| {
                let d = i as f64 / 400.0 * 0.6;
                row(&[(30, d)], if d <= 0.3 { 7 } else { 6 })
            })
            .collect();
        let revised = e.revise(&buffer, 20);
        let new_th = revised.trees[7].levels[0].threshold;
        assert!((new_th - 0.3).abs() <= 0.02, "threshold {new_th} not near 0.3");
        // Structure is frozen.
        assert_eq!(revised.trees[7].levels[0].attribute, 30);
        assert_eq!(revised.trees[7].levels.len(), e.trees[7].levels.len());
        // Agreement on a self-consistent buffer stays high.
        let self_revised = e.revise(&rows, 20);
        let agree = rows
            .iter()
            .filter(|(f, _)| self_revised.predict(f) == e.predict(f))
            .count();
        assert!(agree as f64 >= 0.95 * rows.len() as f64);
    }

    #[test]
    fn model_json_round_trips() {
        let rows = separable(100);
        let e = learn_ensemble(&rows, "guard", 8);
        let text = e.to_json();
        assert!(text.contains("\"format\": 1"));
        let back = FFEnsemble::from_json(&text).unwrap();
        assert_eq!(e, back);
    }

    #[test]
    fn leaf_bound_holds_on_learned_trees() {
        let mut rows = Vec::new();
        for i in 0..500usize {
            let a = (i * 7 + i / 3) % 5;
            rows.push(row(&[(0, (i % 13) as f64), (1, (i % 7) as f64), (2, (i % 3) as f64)], a as u8));
        }
        let e = learn_ensemble(&rows, "guard", 64);
        for t in &e.trees {
            assert!(t.leaves() <= N_FEATURES);
            for l in &t.levels {
                assert!(l.attribute < N_FEATURES);
            }
        }
    }
}
