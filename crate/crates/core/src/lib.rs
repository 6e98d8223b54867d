//! Hierarchical relational SARSA agent for a deterministic tile platformer.
//!
//! - [`env`]: level generator and tick simulator
//! - [`perception`]: grid to objects to relational facts
//! - [`operators`]: functional-level and keystroke-level operators
//! - [`learning`]: value tables and SARSA updates, generic over the scalar
//! - [`agents`]: hierarchical learner, scripted and random baselines
//! - [`harness`]: training runs, comparison, trajectory replay

pub mod agents;
pub mod env;
pub mod error;
pub mod harness;
pub mod learning;
pub mod operators;
pub mod perception;

pub use error::{Error, Result};

pub type QStoreF64 = learning::QStore<f64>;
pub type QStoreF32 = learning::QStore<f32>;
pub type HrlAgentF64 = agents::HrlAgent<f64>;
pub type HrlAgentF32 = agents::HrlAgent<f32>;
pub type LearningParamsF64 = learning::LearningParams<f64>;
pub type LearningParamsF32 = learning::LearningParams<f32>;
