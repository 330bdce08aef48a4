//! Symbolic planning over learned options.
//!
//! A planner over an action description proposes subtask sequences whose
//! quality beats the incumbent; tabular controllers learn each subtask from
//! intrinsic rewards; an R-learning meta-controller scores subtasks with
//! extrinsic rewards, and its gains become the planner's quality facts.

pub mod action_lang;
pub mod config;
pub mod controller;
pub mod envs;
pub mod experiment;
pub mod meta_controller;
pub mod oracle;
pub mod planner;
pub mod report;
pub mod sdrl_loop;
pub mod subtask;
