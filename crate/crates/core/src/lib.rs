//! Multi-agent actor-critic training driven by reward-sharing relational
//! networks.
//!
//! - [`graph`]: weighted digraphs saying whose reward drives whom, plus the
//!   six built-in structures.
//! - [`scalarize`]: weighted sum / weighted product reduction of the joint
//!   reward vector to per-agent relational rewards.
//! - [`env`]: the point-mass landmark world.
//! - [`neuro`]: dense networks, gradients, Adam, checkpoints.
//! - [`trainer`]: replay, centralized critics, deterministic policy
//!   gradients, evaluation.
//! - [`harness`]: experiment configs, run directories, summaries, traces.

pub mod env;
pub mod error;
pub mod graph;
pub mod harness;
pub mod neuro;
pub mod scalarize;
pub mod trainer;

pub use error::{Error, Result};
