//! Grounding, belief closure, default/CR completion, transitions, goal
//! selection, cost-minimal planning, refinement, and reality checks over
//! parsed domain descriptions.
//!
//! Planning is forward uniform-cost search over the grounded transition
//! diagram; small-instance optimality is pinned against an exhaustive
//! enumeration oracle in the test suite.

mod belief;
mod complete;
pub mod ground;
mod monitor;
mod plan;
mod transition;

pub use belief::{abstract_to_coarse, bridge_literal_holds, close, close_incremental, BeliefState, Truth};
pub use complete::{complete_initial_state, Completion};
pub use ground::{
    ground, ground_with_ceiling, AtomId, GoalLit, GroundStats, GroundTheory, SlotCat, SlotRef,
    DEFAULT_GROUND_CEILING,
};
pub use monitor::{monitor, MonitorOutcome};
pub use plan::{
    applicable_goals, plan, plan_goal, refine, select_goal, Goal, GoalTest, Plan, PlanOptions, PlanOutcome,
    RefineError, RefineFailure, DEFAULT_COARSE_HORIZON, DEFAULT_FINE_HORIZON,
};
pub use transition::{transition, TransitionOutcome};

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum ReasonError {
    #[error("grounding exceeds the configured ceiling of {ceiling} instances")]
    GroundingTooLarge { ceiling: u64 },
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("inconsistent state: violated constraint `{rule}`")]
    Inconsistent { rule: String },
    #[error("conflicting direct effects on `{atom}`")]
    ConflictingEffects { atom: String },
    #[error("contradictory observations of `{atom}`")]
    ContradictoryObservations { atom: String },
    #[error("observation of `{0}` is not an inertial fluent of this resolution")]
    InvalidObservation(String),
    #[error("no consistent completion exists even with all CR rules applied")]
    NoConsistentCompletion,
    #[error("{count} ground CR rules exceed the supported maximum of {max}")]
    TooManyCrRules { count: usize, max: usize },
    #[error("invalid goal: {0}")]
    InvalidGoal(String),
}
