//! Online model selection: graded-penalty scoring of behavior models
//! against observed actions and poses, argmax selection, and the novelty
//! trigger for learning fresh models.

use serde::{Deserialize, Serialize};

use crate::fortattack::{wrap_angle, Pose};

pub const INITIAL_SCORE: f64 = 100.0;
pub const DEFAULT_NOVELTY_THRESHOLD: f64 = 60.0;
pub const DEFAULT_NOVELTY_STREAK: u32 = 15;

/// Penalty regime: the graded pose-difference formula, or a fixed unit
/// penalty per action mismatch (the direct-comparison ablations).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyMode {
    Graded,
    Fixed,
}

/// Location/orientation discrepancy between an actual and a predicted pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseDelta {
    /// Euclidean distance in arena units.
    pub location_error: f64,
    /// Absolute angle difference wrapped to [0, pi].
    pub orientation_error: f64,
}

impl PoseDelta {
    pub fn between(actual: &Pose, predicted: &Pose) -> PoseDelta {
        PoseDelta {
            location_error: actual.distance(predicted),
            orientation_error: wrap_angle(actual.orientation - predicted.orientation).abs(),
        }
    }

    /// The graded penalty: position error counts full, orientation error
    /// one tenth.
    pub fn penalty(&self) -> f64 {
        self.location_error + self.orientation_error / 10.0
    }
}

/// One agent-model prediction for the round being scored.
#[derive(Debug, Clone, Copy)]
pub struct Predicted {
    pub action: u8,
    pub pose: Pose,
}

/// What the agent actually did in that round.
#[derive(Debug, Clone, Copy)]
pub struct Actual {
    pub action: u8,
    pub pose: Pose,
}

/// Per-(agent, model) scores; scores start at 100 and only decay until the
/// next reset.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelScoreboard {
    n_agents: usize,
    scores: Vec<Vec<f64>>,
    streaks: Vec<u32>,
    pub mode: PenaltyMode,
}

/// Penalty applied to one (agent, model) pair during an update, for traces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyRecord {
    pub agent: usize,
    pub model: usize,
    pub penalty: f64,
}

impl ModelScoreboard {
    pub fn new(n_agents: usize, n_models: usize, mode: PenaltyMode) -> Self {
        ModelScoreboard {
            n_agents,
            scores: vec![vec![INITIAL_SCORE; n_models]; n_agents],
            streaks: vec![0; n_agents],
            mode,
        }
    }

    pub fn n_models(&self, agent: usize) -> usize {
        self.scores[agent].len()
    }

    pub fn score(&self, agent: usize, model: usize) -> f64 {
        self.scores[agent][model]
    }

    /// A newly learned model joins with the initial score.
    pub fn add_model(&mut self, agent: usize) {
        self.scores[agent].push(INITIAL_SCORE);
    }

    /// Score one round (window of size 1): models whose predicted action
    /// differs from the actual action lose the pose penalty. Returns the
    /// applied penalties for diagnostics.
    pub fn update(
        &mut self,
        actual: &[Option<Actual>],
        predicted: &[Vec<Option<Predicted>>],
    ) -> Vec<PenaltyRecord> {
        assert_eq!(actual.len(), self.n_agents, "one actual per agent");
        let mut records = Vec::new();
        for agent in 0..self.n_agents {
            let Some(act) = actual[agent] else { continue };
            for model in 0..self.scores[agent].len() {
                let pred = predicted[agent]
                    .get(model)
                    .and_then(|p| *p)
                    .unwrap_or_else(|| panic!("missing prediction for live agent {agent} model {model}"));
                if pred.action == act.action {
                    continue;
                }
                let penalty = match self.mode {
                    PenaltyMode::Graded => PoseDelta::between(&act.pose, &pred.pose).penalty(),
                    PenaltyMode::Fixed => 1.0,
                };
                self.scores[agent][model] -= penalty;
                records.push(PenaltyRecord { agent, model, penalty });
            }
        }
        records
    }

    /// Argmax over models; ties go to the lowest model index.
    pub fn select_model(&self, agent: usize) -> usize {
        let row = &self.scores[agent];
        let mut best = 0;
        for (m, s) in row.iter().enumerate().skip(1) {
            if *s > row[best] {
                best = m;
            }
        }
        best
    }

    /// Track the best score against the novelty threshold after a scored
    /// round; fires (and resets the streak) after `streak_len` consecutive
    /// rounds below `threshold`.
    pub fn novelty_trigger(&mut self, agent: usize, threshold: f64, streak_len: u32) -> bool {
        let best = self.scores[agent].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if best < threshold {
            self.streaks[agent] += 1;
        } else {
            self.streaks[agent] = 0;
        }
        if self.streaks[agent] >= streak_len {
            self.streaks[agent] = 0;
            true
        } else {
            false
        }
    }

    /// Episode-boundary reset: scores back to 100, streaks cleared.
    pub fn reset(&mut self) {
        for row in &mut self.scores {
            for s in row.iter_mut() {
                *s = INITIAL_SCORE;
            }
        }
        for s in &mut self.streaks {
            *s = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pose(x: f64, y: f64, o: f64) -> Pose {
        Pose { x, y, orientation: o }
    }

    #[test]
    fn matching_prediction_keeps_the_score() {
        let mut b = ModelScoreboard::new(1, 2, PenaltyMode::Graded);
        let actual = vec![Some(Actual { action: 3, pose: pose(0.5, 0.5, 0.0) })];
        let predicted = vec![vec![
            Some(Predicted { action: 3, pose: pose(0.9, 0.9, 1.0) }),
            Some(Predicted { action: 1, pose: pose(0.5, 0.5, 0.0) }),
        ]];
        b.update(&actual, &predicted);
        assert_eq!(b.score(0, 0), 100.0);
        // Mismatched action with identical resulting pose: zero penalty.
        assert_eq!(b.score(0, 1), 100.0);
    }

    #[test]
    fn graded_penalty_follows_the_formula() {
        let mut b = ModelScoreboard::new(1, 1, PenaltyMode::Graded);
        let actual = vec![Some(Actual { action: 0, pose: pose(0.0, 0.0, 0.0) })];
        // location error 1.5, orientation error 2.0 -> penalty 1.7
        let predicted = vec![vec![Some(Predicted { action: 7, pose: pose(0.9, 1.2, 2.0) })]];
        b.update(&actual, &predicted);
        assert!((b.score(0, 0) - 98.3).abs() < 1e-12);
    }

    #[test]
    fn fixed_mode_charges_unit_penalties() {
        let mut b = ModelScoreboard::new(1, 1, PenaltyMode::Fixed);
        let actual = vec![Some(Actual { action: 0, pose: pose(0.0, 0.0, 0.0) })];
        let predicted = vec![vec![Some(Predicted { action: 7, pose: pose(0.9, 1.2, 2.0) })]];
        let recs = b.update(&actual, &predicted);
        assert_eq!(recs[0].penalty, 1.0);
        assert_eq!(b.score(0, 0), 99.0);
    }

    #[test]
    fn select_model_is_argmax_with_low_index_ties() {
        let mut b = ModelScoreboard::new(1, 2, PenaltyMode::Graded);
        b.scores[0] = vec![95.0, 99.0];
        assert_eq!(b.select_model(0), 1);
        b.scores[0] = vec![97.0, 97.0];
        assert_eq!(b.select_model(0), 0);
    }

    #[test]
    fn scores_never_increase_between_resets() {
        let mut b = ModelScoreboard::new(1, 2, PenaltyMode::Graded);
        let mut last = [100.0, 100.0];
        for round in 0..50 {
            let actual = vec![Some(Actual { action: 0, pose: pose(0.5, 0.5, 0.0) })];
            let predicted = vec![vec![
                Some(Predicted { action: (round % 3 == 0) as u8, pose: pose(0.4, 0.5, 0.3) }),
                Some(Predicted { action: (round % 2) as u8, pose: pose(0.5, 0.6, 0.0) }),
            ]];
            b.update(&actual, &predicted);
            for m in 0..2 {
                assert!(b.score(0, m) <= last[m]);
                last[m] = b.score(0, m);
            }
        }
        b.reset();
        assert_eq!(b.score(0, 0), 100.0);
        assert_eq!(b.score(0, 1), 100.0);
        let again = b.clone();
        b.reset();
        assert_eq!(b, again);
        assert_eq!(b.select_model(0), 0);
    }

    #[test]
    fn novelty_trigger_needs_a_sustained_streak() {
        let mut b = ModelScoreboard::new(1, 1, PenaltyMode::Graded);
        assert!(!b.novelty_trigger(0, 60.0, 15));
        b.scores[0][0] = 55.0;
        for _ in 0..14 {
            assert!(!b.novelty_trigger(0, 60.0, 15));
        }
        assert!(b.novelty_trigger(0, 60.0, 15));
        // Trigger resets the streak.
        assert!(!b.novelty_trigger(0, 60.0, 15));
    }

    #[test]
    fn oscillating_scores_break_the_streak() {
        let mut b = ModelScoreboard::new(1, 1, PenaltyMode::Graded);
        for i in 0..40 {
            b.scores[0][0] = if i % 2 == 0 { 59.0 } else { 61.0 };
            assert!(!b.novelty_trigger(0, 60.0, 15));
        }
    }

    #[test]
    fn uniform_shift_does_not_change_selection() {
        let mut b = ModelScoreboard::new(1, 3, PenaltyMode::Graded);
        b.scores[0] = vec![90.0, 95.0, 80.0];
        let before = b.select_model(0);
        for s in &mut b.scores[0] {
            *s -= 17.25;
        }
        assert_eq!(b.select_model(0), before);
    }

    proptest::proptest! {
        /// Monotone in both components, with a 1-unit location error always
        /// outweighing a 1-radian orientation error.
        #[test]
        fn penalty_is_graded(l in 0.0f64..2.0, o in 0.0f64..std::f64::consts::PI, dl in 1e-6f64..0.5, dod in 1e-6f64..0.5) {
            let base = PoseDelta { location_error: l, orientation_error: o }.penalty();
            let more_loc = PoseDelta { location_error: l + dl, orientation_error: o }.penalty();
            let more_ori = PoseDelta { location_error: l, orientation_error: (o + dod).min(std::f64::consts::PI) }.penalty();
            proptest::prop_assert!(more_loc > base);
            proptest::prop_assert!(more_ori >= base);
            let loc_unit = PoseDelta { location_error: l + 1.0, orientation_error: o }.penalty();
            let ori_unit = PoseDelta { location_error: l, orientation_error: (o + 1.0).min(std::f64::consts::PI) }.penalty();
            proptest::prop_assert!(loc_unit > ori_unit);
        }
    }

    #[test]
    fn graded_penalty_orders_errors_correctly() {
        // Strictly increasing in both errors; 1 unit of location outweighs
        // 1 radian of orientation by the factor-10 division.
        let base = PoseDelta { location_error: 0.5, orientation_error: 1.0 }.penalty();
        assert!(PoseDelta { location_error: 0.6, orientation_error: 1.0 }.penalty() > base);
        assert!(PoseDelta { location_error: 0.5, orientation_error: 1.2 }.penalty() > base);
        let loc = PoseDelta { location_error: 1.0, orientation_error: 0.0 }.penalty();
        let ori = PoseDelta { location_error: 0.0, orientation_error: 1.0 }.penalty();
        assert!(loc > ori);
        assert_eq!(loc, 10.0 * ori);
    }
}
