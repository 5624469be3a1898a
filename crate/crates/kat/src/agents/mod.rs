//! Agent controllers: the knowledge-driven ad hoc guard and the scripted
//! policies driving every other agent.

mod adhoc;
mod dataset;
pub mod domain_gen;
mod scripted;

pub use adhoc::{AdHocController, ControllerConfig, SelectionMode, StepTrace};
pub use dataset::{derive_seed, generate_dataset};
pub use domain_gen::{agent_const, fortattack_domain, fortattack_domain_text, region_of_point};
pub use scripted::{PolicyId, ScriptedPolicy};

use serde::{Deserialize, Serialize};

use crate::fortattack::Pose;

/// One-shot tip from the ad hoc agent to a teammate guard about a hidden
/// attacker; delivered on the following step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub sender: usize,
    pub recipient: usize,
    pub attacker: usize,
    pub pose: Pose,
    pub step: u32,
}
