//! Shared domain types: transitions, episodes, and their shape contract.

use crate::error::{Error, Result};

/// One discrete action index per agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointAction {
    pub actions: Vec<usize>,
}

impl JointAction {
    pub fn new(actions: Vec<usize>) -> Self {
        Self { actions }
    }

    pub fn n_agents(&self) -> usize {
        self.actions.len()
    }
}

/// One environment timestep: everything observed before acting, the joint
/// action taken, and the shared reward that followed.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    /// Global state vector (centralized training input).
    pub state: Vec<f64>,
    /// Per-agent observation vectors.
    pub obs: Vec<Vec<f64>>,
    /// Per-agent legal-action masks at this step.
    pub avail: Vec<Vec<bool>>,
    pub joint_action: JointAction,
    pub reward: f64,
    pub terminated: bool,
    /// False for padding entries; padded steps contribute nothing anywhere.
    pub filled: bool,
}

/// Dimensional contract an episode must satisfy to enter a buffer or batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpisodeShape {
    pub n_agents: usize,
    pub n_actions: usize,
    pub obs_dim: usize,
    pub state_dim: usize,
    pub episode_limit: usize,
}

/// A padded-or-compact sequence of transitions from one rollout.
///
/// Only the leading `length()` steps are real; trailing steps, when present,
/// must be marked `filled = false` and are ignored by every consumer.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub steps: Vec<Transition>,
    pub episode_limit: usize,
}

impl Episode {
    pub fn new(steps: Vec<Transition>, episode_limit: usize) -> Self {
        Self {
            steps,
            episode_limit,
        }
    }

    /// Number of real (filled) steps.
    pub fn length(&self) -> usize {
        self.steps.iter().take_while(|s| s.filled).count()
    }

    /// The filled prefix.
    pub fn filled_steps(&self) -> &[Transition] {
        &self.steps[..self.length()]
    }

    pub fn total_reward(&self) -> f64 {
        self.filled_steps().iter().map(|s| s.reward).sum()
    }

    /// Checks every structural invariant against `shape`.
    pub fn validate(&self, shape: &EpisodeShape) -> Result<()> {
        let n = shape.n_agents;
        let length = self.length();
        if length == 0 {
            return Err(Error::MalformedEpisode("episode has no filled steps".into()));
        }
        if self.steps.len() > shape.episode_limit {
            return Err(Error::MalformedEpisode(format!(
                "episode has {} steps, limit is {}",
                self.steps.len(),
                shape.episode_limit
            )));
        }
        if self.episode_limit != shape.episode_limit {
            return Err(Error::MalformedEpisode(format!(
                "episode limit {} does not match buffer limit {}",
                self.episode_limit, shape.episode_limit
            )));
        }
        if self.steps[length..].iter().any(|s| s.filled) {
            return Err(Error::MalformedEpisode(
                "filled step after padding".into(),
            ));
        }
        for (t, step) in self.filled_steps().iter().enumerate() {
            if step.state.len() != shape.state_dim {
                return Err(Error::MalformedEpisode(format!(
                    "step {t}: state dim {} != {}",
                    step.state.len(),
                    shape.state_dim
                )));
            }
            if step.obs.len() != n || step.avail.len() != n {
                return Err(Error::MalformedEpisode(format!(
                    "step {t}: obs/avail count != {n} agents"
                )));
            }
            if step.obs.iter().any(|o| o.len() != shape.obs_dim) {
                return Err(Error::MalformedEpisode(format!(
                    "step {t}: observation dim != {}",
                    shape.obs_dim
                )));
            }
            if step.avail.iter().any(|a| a.len() != shape.n_actions) {
                return Err(Error::MalformedEpisode(format!(
                    "step {t}: avail mask dim != {}",
                    shape.n_actions
                )));
            }
            if step.joint_action.n_agents() != n {
                return Err(Error::MalformedEpisode(format!(
                    "step {t}: joint action has {} entries, expected {n}",
                    step.joint_action.n_agents()
                )));
            }
            for (agent, &action) in step.joint_action.actions.iter().enumerate() {
                if action >= shape.n_actions || !step.avail[agent][action] {
                    return Err(Error::MalformedEpisode(format!(
                        "step {t}: agent {agent} took unavailable action {action}"
                    )));
                }
            }
            if !step.reward.is_finite() {
                return Err(Error::MalformedEpisode(format!(
                    "step {t}: non-finite reward"
                )));
            }
            if step.terminated && t != length - 1 {
                return Err(Error::MalformedEpisode(format!(
                    "step {t}: terminated before final step {}",
                    length - 1
                )));
            }
        }
        Ok(())
    }
}
