//! Cooperative multi-agent reinforcement learning with regret-optimal
//! replay weighting.
//!
//! The crate implements a value-factorization learner (per-agent utility
//! networks mixed by a monotonic state-conditioned network, with an
//! unrestricted joint-value head estimating the optimum) whose replay loss
//! is reweighted per sample. The flagship `macpo` scheme weighs each sample
//! by Bellman error x value enhancement x joint action probability; the
//! approximated variant and several single-agent prioritization baselines
//! (PER, DisCor, ReMERN, PSER) are provided in the same weighted-loss form,
//! all under plain uniform sampling from an episode ring buffer.
//!
//! Environments: a partially observable Predator-Prey gridworld and a
//! one-step matrix game used as an exactly solvable oracle. Everything is
//! seeded and deterministic; all numerics are `f64`.

pub mod buffer;
pub mod config;
pub mod env;
pub mod error;
pub mod io;
pub mod learner;
pub mod nn;
pub mod priority;
pub mod rng;
pub mod types;

pub use buffer::ReplayBuffer;
pub use config::RunConfig;
pub use error::{Error, Result};
pub use rng::Rng;
pub use types::{Episode, EpisodeShape, JointAction, Transition};
