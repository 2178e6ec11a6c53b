//! Flattening sampled episodes into the dense tensors one update consumes.
//!
//! Only filled steps are materialized: padding never enters a matrix, so
//! padded entries contribute exactly nothing to losses or statistics.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::nn::Matrix;
use crate::types::{Episode, EpisodeShape};

/// Writes one agent-network input row:
/// `[observation | one-hot last action | one-hot agent id]`.
///
/// `last_action` is `None` on the first step of an episode.
pub fn write_agent_input(
    row: &mut [f64],
    obs: &[f64],
    last_action: Option<usize>,
    agent: usize,
    n_actions: usize,
    n_agents: usize,
) {
    let obs_dim = obs.len();
    debug_assert_eq!(row.len(), obs_dim + n_actions + n_agents);
    row[..obs_dim].copy_from_slice(obs);
    row[obs_dim..].fill(0.0);
    if let Some(action) = last_action {
        row[obs_dim + action] = 1.0;
    }
    row[obs_dim + n_actions + agent] = 1.0;
}

pub fn agent_input_dim(shape: &EpisodeShape) -> usize {
    shape.obs_dim + shape.n_actions + shape.n_agents
}

/// Dense, time-flattened view of a batch of episodes.
///
/// Row `i` is one (episode, timestep) sample; agent-indexed tensors use
/// row-major `(row, agent)` order, so agent `a` of row `i` lives at
/// `i * n_agents + a`.
#[derive(Debug, Clone)]
pub struct FlatBatch {
    pub shape: EpisodeShape,
    pub rows: usize,
    pub states: Matrix,
    pub agent_inputs: Matrix,
    /// Availability flattened as `(row, agent, action)`.
    pub avail: Vec<bool>,
    /// Taken action per `(row, agent)`.
    pub taken: Vec<usize>,
    pub rewards: Vec<f64>,
    pub terminated: Vec<bool>,
    /// Consecutive row ranges, one per episode.
    pub episode_ranges: Vec<Range<usize>>,
}

impl FlatBatch {
    pub fn assemble(episodes: &[&Episode], shape: &EpisodeShape) -> Result<Self> {
        let rows: usize = episodes.iter().map(|e| e.length()).sum();
        if rows == 0 {
            return Err(Error::EmptyBatch);
        }
        let (n, m) = (shape.n_agents, shape.n_actions);
        let input_dim = agent_input_dim(shape);
        let mut states = Matrix::zeros(rows, shape.state_dim);
        let mut agent_inputs = Matrix::zeros(rows * n, input_dim);
        let mut avail = Vec::with_capacity(rows * n * m);
        let mut taken = Vec::with_capacity(rows * n);
        let mut rewards = Vec::with_capacity(rows);
        let mut terminated = Vec::with_capacity(rows);
        let mut episode_ranges = Vec::with_capacity(episodes.len());
        let mut row = 0;
        for episode in episodes {
            episode.validate(shape)?;
            let start = row;
            let mut last_actions: Option<&[usize]> = None;
            for step in episode.filled_steps() {
                if step.state.len() != shape.state_dim {
                    return Err(Error::ShapeMismatch {
                        context: "batch state",
                        expected: shape.state_dim,
                        actual: step.state.len(),
                    });
                }
                states.row_mut(row).copy_from_slice(&step.state);
                for agent in 0..n {
                    write_agent_input(
                        agent_inputs.row_mut(row * n + agent),
                        &step.obs[agent],
                        last_actions.map(|acts| acts[agent]),
                        agent,
                        m,
                        n,
                    );
                    avail.extend_from_slice(&step.avail[agent]);
                    taken.push(step.joint_action.actions[agent]);
                }
                rewards.push(step.reward);
                terminated.push(step.terminated);
                last_actions = Some(&step.joint_action.actions);
                row += 1;
            }
            episode_ranges.push(start..row);
        }
        Ok(Self {
            shape: *shape,
            rows,
            states,
            agent_inputs,
            avail,
            taken,
            rewards,
            terminated,
            episode_ranges,
        })
    }

    /// Availability mask of one `(row, agent)`.
    pub fn avail_of(&self, row: usize, agent: usize) -> &[bool] {
        let m = self.shape.n_actions;
        let base = (row * self.shape.n_agents + agent) * m;
        &self.avail[base..base + m]
    }

    pub fn taken_of(&self, row: usize, agent: usize) -> usize {
        self.taken[row * self.shape.n_agents + agent]
    }
}
