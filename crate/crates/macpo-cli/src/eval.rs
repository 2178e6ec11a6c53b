//! Greedy policy evaluation.

use anyhow::{anyhow, Result};
use std::path::Path;

use macpo_core::env::EnvSpec;
use macpo_core::learner::checkpoint::load_checkpoint;
use macpo_core::learner::{rollout, EpsilonSchedule};
use macpo_core::nn::Mlp;
use macpo_core::rng::Rng;

/// Stream-id bases keeping evaluation rng independent of training rng.
const EVAL_ENV_STREAM: u64 = 1_000_000;
const EVAL_ACTION_STREAM: u64 = 2_000_000;

/// Runs `episodes` pure-greedy episodes (epsilon = 0) and returns each
/// episode's total reward. `stream_offset` distinguishes evaluation points
/// within one training run.
pub fn evaluate_policy(
    env_spec: &EnvSpec,
    agent: &Mlp,
    episodes: usize,
    seed: u64,
    stream_offset: u64,
) -> Result<Vec<f64>> {
    let mut env = env_spec.build().map_err(|e| anyhow!("{e}"))?;
    let mut env_rng = Rng::stream(seed, EVAL_ENV_STREAM + stream_offset);
    let mut action_rng = Rng::stream(seed, EVAL_ACTION_STREAM + stream_offset);
    let schedule = EpsilonSchedule::constant(0.0);
    let mut rewards = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        let outcome = rollout(
            env.as_mut(),
            agent,
            &schedule,
            0,
            &mut env_rng,
            &mut action_rng,
            None,
        )
        .map_err(|e| anyhow!("{e}"))?;
        rewards.push(outcome.total_reward);
    }
    Ok(rewards)
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub mean_reward: f64,
    pub rewards: Vec<f64>,
}

/// Loads a checkpoint and evaluates its greedy policy on the configured
/// environment.
pub fn run_eval(
    checkpoint: &Path,
    env_spec: &EnvSpec,
    episodes: usize,
    seed: u64,
) -> Result<EvalOutcome> {
    let (networks, meta) = load_checkpoint(checkpoint).map_err(|e| anyhow!("{e}"))?;
    let env = env_spec.build().map_err(|e| anyhow!("{e}"))?;
    let shape = env.episode_shape();
    if meta.shape != shape {
        return Err(anyhow!(
            "checkpoint was trained for a different environment shape \
             (checkpoint {:?}, config {:?})",
            meta.shape,
            shape
        ));
    }
    drop(env);
    let rewards = evaluate_policy(env_spec, &networks.agent, episodes, seed, 0)?;
    Ok(EvalOutcome {
        mean_reward: mean(&rewards),
        rewards,
    })
}
