//! Greedy induction of fast-and-frugal trees and per-action ensembles.

use super::features::{FeatureVector, N_FEATURES};
use super::{FFEnsemble, FFLevel, FFTree};
use crate::fortattack::N_ACTIONS;

/// Leaves are bounded by the attribute count, so levels stop one short.
pub const MAX_LEVELS: usize = N_FEATURES - 1;

/// Balanced accuracy from a confusion count.
fn balanced_accuracy(tp: usize, fn_: usize, tn: usize, fp: usize) -> f64 {
    let tpr = if tp + fn_ > 0 { tp as f64 / (tp + fn_) as f64 } else { 1.0 };
    let tnr = if tn + fp > 0 { tn as f64 / (tn + fp) as f64 } else { 1.0 };
    (tpr + tnr) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub attribute: usize,
    pub threshold: f64,
    pub balanced_accuracy: f64,
}

/// Best (attribute, threshold) split of `pool` by balanced accuracy, where
/// each side of the candidate split predicts its own majority label.
/// Thresholds are midpoints between consecutive distinct values; ties pick
/// the lower attribute index, then the lower threshold. `None` when no
/// attribute has two distinct values.
pub fn best_split<F>(pool: &[usize], value: F, label: &[bool]) -> Option<Split>
where
    F: Fn(usize, usize) -> f64,
{
    let total_pos = pool.iter().filter(|&&r| label[r]).count();
    let total_neg = pool.len() - total_pos;
    let mut best: Option<Split> = None;
    for attr in 0..N_FEATURES {
        let mut ordered: Vec<(f64, bool)> = pool.iter().map(|&r| (value(r, attr), label[r])).collect();
        ordered.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));
        let mut pos_le = 0usize;
        let mut n_le = 0usize;
        for i in 0..ordered.len().saturating_sub(1) {
            n_le += 1;
            if ordered[i].1 {
                pos_le += 1;
            }
            if ordered[i].0 == ordered[i + 1].0 {
                continue;
            }
            let threshold = (ordered[i].0 + ordered[i + 1].0) / 2.0;
            let neg_le = n_le - pos_le;
            let pos_gt = total_pos - pos_le;
            let neg_gt = total_neg - neg_le;
            // Majority labels per side (ties predict "pass").
            let label_le = pos_le > neg_le;
            let label_gt = pos_gt > neg_gt;
            let (mut tp, mut fn_, mut tn, mut fp) = (0, 0, 0, 0);
            if label_le {
                tp += pos_le;
                fp += neg_le;
            } else {
                tn += neg_le;
                fn_ += pos_le;
            }
            if label_gt {
                tp += pos_gt;
                fp += neg_gt;
            } else {
                tn += neg_gt;
                fn_ += pos_gt;
            }
            let ba = balanced_accuracy(tp, fn_, tn, fp);
            let better = match &best {
                None => true,
                Some(b) => ba > b.balanced_accuracy,
            };
            if better {
                best = Some(Split { attribute: attr, threshold, balanced_accuracy: ba });
            }
        }
    }
    best
}

fn majority(pool: &[usize], label: &[bool]) -> bool {
    let pos = pool.iter().filter(|&&r| label[r]).count();
    // Ties predict "pass".
    pos * 2 > pool.len()
}

fn purity(pos: usize, len: usize) -> f64 {
    if len == 0 {
        return 0.0;
    }
    let p = pos as f64 / len as f64;
    p.max(1.0 - p)
}

/// Greedy fast-and-frugal induction for the binary task
/// "next action == action_id".
pub fn learn_tree(
    rows: &[(FeatureVector, u8)],
    action_id: u8,
    max_levels: usize,
) -> FFTree {
    let label: Vec<bool> = rows.iter().map(|(_, a)| *a == action_id).collect();
    let mut pool: Vec<usize> = (0..rows.len()).collect();
    let mut levels: Vec<FFLevel> = Vec::new();
    let cap = max_levels.min(MAX_LEVELS);

    while levels.len() < cap {
        let pos = pool.iter().filter(|&&r| label[r]).count();
        if pos == 0 || pos == pool.len() {
            break; // pure pool
        }
        let Some(split) = best_split(&pool, |r, a| rows[r].0.get(a), &label) else {
            break;
        };
        if split.balanced_accuracy <= 0.5 {
            break; // no split improves on the majority assignment
        }
        // Pick the exit side: the branch whose majority class is purer.
        let le: Vec<usize> = pool
            .iter()
            .copied()
            .filter(|&r| rows[r].0.get(split.attribute) <= split.threshold)
            .collect();
        let gt: Vec<usize> = pool
            .iter()
            .copied()
            .filter(|&r| rows[r].0.get(split.attribute) > split.threshold)
            .collect();
        let pos_le = le.iter().filter(|&&r| label[r]).count();
        let pos_gt = gt.iter().filter(|&&r| label[r]).count();
        let exit_on_le = purity(pos_le, le.len()) >= purity(pos_gt, gt.len());
        let (exit_rows, rest) = if exit_on_le { (le, gt) } else { (gt, le) };
        let exit_label = majority(&exit_rows, &label);
        levels.push(FFLevel {
            attribute: split.attribute,
            threshold: split.threshold,
            exit_on_le,
            exit_label,
        });
        pool = rest;
        if pool.is_empty() {
            break;
        }
    }
    let final_label = majority(&pool, &label);
    FFTree { action_id, levels, final_label }
}

/// One tree per action (one-vs-rest) plus empirical priors.
pub fn learn_ensemble(
    rows: &[(FeatureVector, u8)],
    agent_type: &str,
    max_levels: usize,
) -> FFEnsemble {
    let mut counts = [0usize; N_ACTIONS];
    for (_, a) in rows {
        counts[*a as usize] += 1;
    }
    let total: usize = counts.iter().sum();
    let trees: Vec<FFTree> = (0..N_ACTIONS as u8)
        .map(|action| {
            if counts[action as usize] == 0 {
                // Never seen: constant "pass".
                FFTree { action_id: action, levels: Vec::new(), final_label: false }
            } else {
                learn_tree(rows, action, max_levels)
            }
        })
        .collect();
    let priors: Vec<f64> = counts
        .iter()
        .map(|&c| if total > 0 { c as f64 / total as f64 } else { 0.0 })
        .collect();
    FFEnsemble { agent_type: agent_type.to_string(), trees, priors }
}

impl FFTree {
    /// Walk the levels; `Some((label, depth))` when a level exits, else the
    /// final label at depth `levels.len()`.
    pub fn classify(&self, f: &FeatureVector) -> (bool, usize) {
        for (depth, level) in self.levels.iter().enumerate() {
            let le = f.get(level.attribute) <= level.threshold;
            if le == level.exit_on_le {
                return (level.exit_label, depth);
            }
        }
        (self.final_label, self.levels.len())
    }
}

impl FFEnsemble {
    /// Predicted next action: among firing trees the shallowest exit wins;
    /// ties prefer the higher prior, then the lower action id. If no tree
    /// fires, the highest-prior action (lower id on ties).
    pub fn predict(&self, f: &FeatureVector) -> u8 {
        let mut fired: Option<(usize, f64, u8)> = None; // (depth, -prior?, id) handled manually
        for tree in &self.trees {
            let (fires, depth) = tree.classify(f);
            if !fires {
                continue;
            }
            let prior = self.priors[tree.action_id as usize];
            let better = match &fired {
                None => true,
                Some((bd, bp, bid)) => {
                    depth < *bd
                        || (depth == *bd && prior > *bp)
                        || (depth == *bd && prior == *bp && tree.action_id < *bid)
                }
            };
            if better {
                fired = Some((depth, prior, tree.action_id));
            }
        }
        if let Some((_, _, id)) = fired {
            return id;
        }
        let mut best = 0u8;
        for a in 1..N_ACTIONS as u8 {
            if self.priors[a as usize] > self.priors[best as usize] {
                best = a;
            }
        }
        best
    }

    /// Re-fit thresholds, final labels, and priors against a recent buffer;
    /// tree structure (attribute order, exit sides and labels) is frozen.
    /// Buffers below `min_rows` return the ensemble unchanged.
    pub fn revise(&self, buffer: &[(FeatureVector, u8)], min_rows: usize) -> FFEnsemble {
        if buffer.len() < min_rows {
            return self.clone();
        }
        let mut trees = Vec::with_capacity(self.trees.len());
        for tree in &self.trees {
            let label: Vec<bool> = buffer.iter().map(|(_, a)| *a == tree.action_id).collect();
            let mut pool: Vec<usize> = (0..buffer.len()).collect();
            let mut levels = Vec::with_capacity(tree.levels.len());
            for level in &tree.levels {
                let threshold = refit_threshold(&pool, buffer, level.attribute, &label)
                    .unwrap_or(level.threshold);
                let new_level = FFLevel { threshold, ..*level };
                pool.retain(|&r| {
                    let le = buffer[r].0.get(new_level.attribute) <= new_level.threshold;
                    le != new_level.exit_on_le
                });
                levels.push(new_level);
            }
            let final_label = if pool.is_empty() { tree.final_label } else { majority(&pool, &label) };
            trees.push(FFTree { action_id: tree.action_id, levels, final_label });
        }
        let mut counts = [0usize; N_ACTIONS];
        for (_, a) in buffer {
            counts[*a as usize] += 1;
        }
        let total: usize = counts.iter().sum();
        let priors: Vec<f64> = self
            .priors
            .iter()
            .enumerate()
            .map(|(a, &p)| 0.5 * p + 0.5 * (counts[a] as f64 / total.max(1) as f64))
            .collect();
        FFEnsemble { agent_type: self.agent_type.clone(), trees, priors }
    }
}

/// Best threshold for one fixed attribute over the pool (the learn_tree
/// criterion restricted to that attribute).
fn refit_threshold(
    pool: &[usize],
    rows: &[(FeatureVector, u8)],
    attribute: usize,
    label: &[bool],
) -> Option<f64> {
    if pool.is_empty() {
        return None;
    }
    let total_pos = pool.iter().filter(|&&r| label[r]).count();
    let total_neg = pool.len() - total_pos;
    let mut ordered: Vec<(f64, bool)> = pool.iter().map(|&r| (rows[r].0.get(attribute), label[r])).collect();
    ordered.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));
    let mut best: Option<(f64, f64)> = None; // (ba, threshold)
    let mut pos_le = 0usize;
    let mut n_le = 0usize;
    for i in 0..ordered.len().saturating_sub(1) {
        n_le += 1;
        if ordered[i].1 {
            pos_le += 1;
        }
        if ordered[i].0 == ordered[i + 1].0 {
            continue;
        }
        let threshold = (ordered[i].0 + ordered[i + 1].0) / 2.0;
        let neg_le = n_le - pos_le;
        let pos_gt = total_pos - pos_le;
        let neg_gt = total_neg - neg_le;
        let label_le = pos_le > neg_le;
        let label_gt = pos_gt > neg_gt;
        let (mut tp, mut fn_, mut tn, mut fp) = (0, 0, 0, 0);
        if label_le {
            tp += pos_le;
            fp += neg_le;
        } else {
            tn += neg_le;
            fn_ += pos_le;
        }
        if label_gt {
            tp += pos_gt;
            fp += neg_gt;
        } else {
            tn += neg_gt;
            fn_ += pos_gt;
        }
        let ba = balanced_accuracy(tp, fn_, tn, fp);
        if best.map(|(b, _)| ba > b).unwrap_or(true) {
            best = Some((ba, threshold));
        }
    }
    best.map(|(_, t)| t)
}
