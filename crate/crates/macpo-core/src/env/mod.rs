//! Cooperative multi-agent environments.
//!
//! Two environments ship with the lab: the partially observable
//! Predator-Prey gridworld, and a one-step matrix game whose payoff tensor
//! is fully enumerable and therefore serves as an exactly solvable oracle.

pub mod matrix_game;
pub mod predator_prey;

pub use matrix_game::{MatrixGameEnv, MatrixGameSpec};
pub use predator_prey::{PredatorPreyEnv, PredatorPreySpec};

use crate::error::Result;
use crate::rng::Rng;
use crate::types::{EpisodeShape, JointAction};

/// What an agent sees at the start of a step.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub state: Vec<f64>,
    pub obs: Vec<Vec<f64>>,
    pub avail: Vec<Vec<bool>>,
}

#[derive(Debug, Clone)]
pub struct StepResult {
    pub reward: f64,
    pub terminated: bool,
    pub snapshot: Snapshot,
}

/// A stepped, resettable multi-agent environment.
///
/// Implementations are deterministic given the `Rng` streams passed in;
/// a single instance is not safe to mutate concurrently, but independent
/// instances with independent streams may run in parallel.
pub trait Environment {
    fn n_agents(&self) -> usize;
    fn n_actions(&self) -> usize;
    fn obs_dim(&self) -> usize;
    fn state_dim(&self) -> usize;
    fn episode_limit(&self) -> usize;

    fn reset(&mut self, rng: &mut Rng) -> Result<Snapshot>;
    fn step(&mut self, actions: &JointAction, rng: &mut Rng) -> Result<StepResult>;

    /// One ASCII frame of the current state, for `--render` debugging.
    fn render(&self) -> String;

    fn episode_shape(&self) -> EpisodeShape {
        EpisodeShape {
            n_agents: self.n_agents(),
            n_actions: self.n_actions(),
            obs_dim: self.obs_dim(),
            state_dim: self.state_dim(),
            episode_limit: self.episode_limit(),
        }
    }
}

/// Environment description carried by the run configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum EnvSpec {
    PredatorPrey(PredatorPreySpec),
    MatrixGame(MatrixGameSpec),
}

impl EnvSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            EnvSpec::PredatorPrey(spec) => spec.validate(),
            EnvSpec::MatrixGame(spec) => spec.validate(),
        }
    }

    pub fn build(&self) -> Result<Box<dyn Environment>> {
        self.validate()?;
        Ok(match self {
            EnvSpec::PredatorPrey(spec) => Box::new(PredatorPreyEnv::new(spec.clone())),
            EnvSpec::MatrixGame(spec) => Box::new(MatrixGameEnv::new(spec.clone())),
        })
    }
}
