//! Two-stage mission planning for heterogeneous robot teams.
//!
//! A mission is a tree of tasks whose leaves are actions. The first stage
//! picks promising sets of actions that complete the mission
//! ([`decomposition`]). The second stage allocates and orders those actions
//! over the robots with a multi-objective evolutionary search run by a
//! coalition of agents ([`evolution`], [`coalition`]). [`planner::plan`]
//! chains both stages.

pub mod benchmark;
pub mod cli;
pub mod coalition;
pub mod decomposition;
pub mod error;
pub mod evolution;
pub mod geometry;
pub mod greenhouse;
pub mod mission;
pub mod planner;
pub mod report;
pub mod schedule;
pub mod task_model;
pub mod validation;

pub use error::{Error, Result};
