//! Core engine: plan parsing and validation, arm kinematics, the simulated
//! scene, action execution, predicate checks, motion scoring and the
//! retune/replan loop.

pub mod plan;
pub mod kinematics;
pub mod scene;
pub mod checks;
pub mod scoring;
pub mod sim;
pub mod backend;
pub mod adapt;
pub mod runlog;
