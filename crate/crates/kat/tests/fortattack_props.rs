//! Property and metamorphic tests for the arena: left-right mirror
//! symmetry, pose boundedness, and observation-order invariance of the
//! communication decision.

mod common;

use kat::agents::{fortattack_domain, AdHocController, ControllerConfig};
use kat::fftree::{FeatureVector, N_FEATURES};
use kat::fortattack::{
    wrap_angle, Action, Observability, Pose, Rect, ScenarioConfig, WorldState, N_AGENTS,
};
use proptest::prelude::*;

/// Mirror a world across the vertical axis through x = 0.5.
fn mirror_world(w: &WorldState) -> WorldState {
    let mut m = w.clone();
    for a in &mut m.agents {
        a.pose.x = 1.0 - a.pose.x;
        a.pose.orientation = wrap_angle(std::f64::consts::PI - a.pose.orientation);
        a.last_action = a.last_action.map(Action::mirrored);
    }
    m
}

fn close_pose(a: &Pose, b: &Pose, tol: f64) -> bool {
    (a.x - b.x).abs() < tol && (a.y - b.y).abs() < tol && wrap_angle(a.orientation - b.orientation).abs() < tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Mirroring the arena and all actions yields the mirrored trajectory.
    #[test]
    fn mirror_metamorphic(seed in 0u64..500, actions in proptest::collection::vec(0u8..8, 1..30)) {
        let cfg = ScenarioConfig::default();
        let mut w = WorldState::reset(seed, &cfg).unwrap();
        let mut m = mirror_world(&w);
        for chunk in &actions {
            let a = Action::from_id(*chunk).unwrap();
            let mut joint = [None; N_AGENTS];
            let mut mirrored = [None; N_AGENTS];
            for i in 0..N_AGENTS {
                if w.agents[i].alive {
                    joint[i] = Some(a);
                    mirrored[i] = Some(a.mirrored());
                }
            }
            let o1 = w.step(&joint).unwrap();
            let o2 = m.step(&mirrored).unwrap();
            prop_assert_eq!(o1, o2, "outcomes diverge under mirroring");
            for i in 0..N_AGENTS {
                prop_assert_eq!(w.agents[i].alive, m.agents[i].alive);
                let expect = mirror_world(&w).agents[i].pose;
                prop_assert!(
                    close_pose(&expect, &m.agents[i].pose, 1e-9),
                    "agent {} pose diverges under mirroring", i
                );
            }
            if o1.is_some() {
                break;
            }
        }
    }

    /// Poses stay inside the unit square under any action sequence.
    #[test]
    fn poses_stay_bounded(seed in 0u64..500, actions in proptest::collection::vec(0u8..8, 1..60)) {
        let cfg = ScenarioConfig::default();
        let mut w = WorldState::reset(seed, &cfg).unwrap();
        for (k, chunk) in actions.iter().enumerate() {
            let mut joint = [None; N_AGENTS];
            for i in 0..N_AGENTS {
                if w.agents[i].alive {
                    joint[i] = Some(Action::from_id((*chunk + i as u8 + k as u8) % 8).unwrap());
                }
            }
            if w.step(&joint).unwrap().is_some() {
                break;
            }
            for a in &w.agents {
                prop_assert!(a.pose.x >= 0.0 && a.pose.x <= 1.0);
                prop_assert!(a.pose.y >= 0.0 && a.pose.y <= 1.0);
                prop_assert!(a.pose.orientation >= -std::f64::consts::PI);
                prop_assert!(a.pose.orientation <= std::f64::consts::PI);
            }
        }
    }

    /// wrap_angle always lands in [-pi, pi].
    #[test]
    fn wrap_angle_is_bounded(a in -100.0f64..100.0) {
        let w = wrap_angle(a);
        prop_assert!((-std::f64::consts::PI..=std::f64::consts::PI).contains(&w));
    }
}

/// A few synthetic rows so the controller has non-empty model libraries.
fn tiny_training_rows() -> Vec<(FeatureVector, u8)> {
    (0..40)
        .map(|i| {
            let mut f = [0.0f64; N_FEATURES];
            f[0] = i as f64 / 40.0;
            (FeatureVector(f), if i % 2 == 0 { 6 } else { 1 })
        })
        .collect()
}

/// The communication decision must not depend on the order agents appear
/// in the observation.
#[test]
fn communicate_is_invariant_to_observation_order() {
    let mut cfg = ScenarioConfig::default();
    cfg.observability = Observability::Partial;
    cfg.forest = Some(Rect { x0: 0.02, y0: 0.22, x1: 0.55, y1: 0.52 });
    let domain = fortattack_domain(&cfg).unwrap();
    let theory = std::sync::Arc::new(kat::reasoner::ground(&domain).unwrap());
    let rows = tiny_training_rows();
    let guard_model = kat::fftree::learn_ensemble(&rows, "guard", 4);
    let attacker_model = kat::fftree::learn_ensemble(&rows, "attacker", 4);

    let mut w = WorldState::reset(5, &cfg).unwrap();
    // Put an attacker deep in the forest with a teammate close to it.
    w.agents[4].pose = Pose { x: 0.30, y: 0.30, orientation: -1.0 };
    w.agents[1].pose = Pose { x: 0.32, y: 0.14, orientation: 1.5 };
    w.agents[0].pose = Pose { x: 0.70, y: 0.12, orientation: 1.5 };

    let mut messages = Vec::new();
    for reverse in [false, true] {
        let mut controller = AdHocController::new(
            std::sync::Arc::clone(&theory),
            cfg.clone(),
            ControllerConfig { comm_enabled: true, ..Default::default() },
            vec![guard_model.clone()],
            vec![attacker_model.clone()],
        );
        let mut obs = w.observe(0, Observability::Partial).unwrap();
        if reverse {
            obs.visible.reverse();
        }
        let (_, message) = controller.act(&obs);
        messages.push(message);
    }
    assert_eq!(messages[0], messages[1], "message must not depend on view order");
    let msg = messages[0].expect("hidden attacker with a closer in-range teammate yields a message");
    assert_eq!(msg.recipient, 1);
    assert_eq!(msg.attacker, 4);

    // No attacker in the forest: silence.
    let mut w2 = w.clone();
    w2.agents[4].pose = Pose { x: 0.30, y: 0.70, orientation: -1.0 };
    let mut controller = AdHocController::new(
        std::sync::Arc::clone(&theory),
        cfg.clone(),
        ControllerConfig { comm_enabled: true, ..Default::default() },
        vec![guard_model.clone()],
        vec![attacker_model.clone()],
    );
    let obs = w2.observe(0, Observability::Partial).unwrap();
    assert_eq!(controller.act(&obs).1, None, "nothing hidden, nothing to report");

    // Hidden attacker but no teammate has it in range: silence too.
    let mut w3 = w.clone();
    w3.agents[1].pose = Pose { x: 0.95, y: 0.12, orientation: 1.5 };
    w3.agents[2].pose = Pose { x: 0.85, y: 0.12, orientation: 1.5 };
    let mut controller = AdHocController::new(
        std::sync::Arc::clone(&theory),
        cfg.clone(),
        ControllerConfig { comm_enabled: true, ..Default::default() },
        vec![guard_model.clone()],
        vec![attacker_model.clone()],
    );
    let obs = w3.observe(0, Observability::Partial).unwrap();
    assert_eq!(controller.act(&obs).1, None, "out-of-range teammates are not messaged");
}
