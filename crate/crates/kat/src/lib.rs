//! Knowledge-driven ad hoc teamwork at desk scale: an action-language
//! reasoner with defaults and consistency-restoring completion, cost-minimal
//! planning at two coupled resolutions, fast-and-frugal behavior models with
//! online selection and revision, a Fort Attack arena, and an experiment
//! harness that exercises the whole stack.

pub mod agents;
pub mod fftree;
pub mod fortattack;
pub mod harness;
pub mod modelsel;
pub mod reasoner;
pub mod rulelang;
