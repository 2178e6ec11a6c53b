//! Full experiment description: environment, scheme, hyperparameters, seed.

use crate::env::{EnvSpec, PredatorPreySpec};
use crate::error::{Error, Result};
use crate::priority::{ApproxThresholds, Scheme};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub env: EnvSpec,
    pub scheme: Scheme,
    pub seed: u64,
    /// Environment steps to run.
    pub step_max: usize,
    pub batch_size: usize,
    /// Buffer capacity in episodes.
    pub buffer_capacity: usize,
    /// Target sync interval in episodes.
    pub target_update_interval: usize,
    pub learning_rate: f64,
    pub td_lambda: f64,
    pub gamma: f64,
    pub grad_norm_clip: f64,
    pub epsilon_start: f64,
    pub epsilon_finish: f64,
    /// Environment steps over which epsilon anneals linearly.
    pub epsilon_anneal_steps: usize,
    pub thresholds: ApproxThresholds,
    pub pser_decay: f64,
    pub pser_window: usize,
    /// Episodes in the buffer before training starts.
    pub min_buffer_episodes: usize,
    pub updates_per_episode: usize,
    /// Environment steps between evaluation rows.
    pub eval_interval: usize,
    pub eval_episodes: usize,
    /// Environment steps between checkpoints; 0 writes only the final one.
    pub checkpoint_interval: usize,
    pub agent_hidden: usize,
    pub mixing_embed: usize,
    pub hypernet_hidden: usize,
    pub qstar_hidden: usize,
    /// Deterministic mode: single-threaded, wall-clock column zeroed.
    pub deterministic: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            env: EnvSpec::PredatorPrey(PredatorPreySpec::scaled(0.0)),
            scheme: Scheme::Macpo,
            seed: 1,
            step_max: 300_000,
            batch_size: 128,
            buffer_capacity: 10_000,
            target_update_interval: 200,
            learning_rate: 0.001,
            td_lambda: 0.6,
            gamma: 0.99,
            grad_norm_clip: 10.0,
            epsilon_start: 0.995,
            epsilon_finish: 0.05,
            epsilon_anneal_steps: 100_000,
            thresholds: ApproxThresholds::default(),
            pser_decay: 0.4,
            pser_window: 5,
            min_buffer_episodes: 128,
            updates_per_episode: 1,
            eval_interval: 10_000,
            eval_episodes: 32,
            checkpoint_interval: 0,
            agent_hidden: 64,
            mixing_embed: 32,
            hypernet_hidden: 64,
            qstar_hidden: 64,
            deterministic: true,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.thresholds.validate()?;
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::InvalidConfig(format!(
                "gamma must be in [0, 1), got {}",
                self.gamma
            )));
        }
        if !(0.0..=1.0).contains(&self.td_lambda) {
            return Err(Error::InvalidConfig(format!(
                "td_lambda must be in [0, 1], got {}",
                self.td_lambda
            )));
        }
        if !(0.0..=1.0).contains(&self.epsilon_start)
            || !(0.0..=1.0).contains(&self.epsilon_finish)
        {
            return Err(Error::InvalidConfig("epsilon endpoints must be in [0, 1]".into()));
        }
        if self.batch_size == 0 || self.buffer_capacity == 0 {
            return Err(Error::InvalidConfig(
                "batch size and buffer capacity must be positive".into(),
            ));
        }
        if self.learning_rate <= 0.0 || !self.learning_rate.is_finite() {
            return Err(Error::InvalidConfig("learning rate must be positive".into()));
        }
        if self.target_update_interval == 0 {
            return Err(Error::InvalidConfig(
                "target update interval must be positive".into(),
            ));
        }
        if self.min_buffer_episodes == 0 || self.updates_per_episode == 0 {
            return Err(Error::InvalidConfig(
                "warmup episodes and updates per episode must be positive".into(),
            ));
        }
        if self.eval_interval == 0 || self.eval_episodes == 0 {
            return Err(Error::InvalidConfig(
                "eval interval and episode count must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.pser_decay) {
            return Err(Error::InvalidConfig("pser decay must be in [0, 1)".into()));
        }
        if self.agent_hidden == 0
            || self.mixing_embed == 0
            || self.hypernet_hidden == 0
            || self.qstar_hidden == 0
        {
            return Err(Error::InvalidConfig("network widths must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_match_the_reference_settings() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.batch_size, 128);
        assert_eq!(cfg.buffer_capacity, 10_000);
        assert_eq!(cfg.target_update_interval, 200);
        assert_eq!(cfg.learning_rate, 0.001);
        assert_eq!(cfg.td_lambda, 0.6);
        assert_eq!(cfg.epsilon_start, 0.995);
        assert_eq!(cfg.epsilon_finish, 0.05);
        assert_eq!(cfg.epsilon_anneal_steps, 100_000);
        assert_eq!(cfg.thresholds.alpha_high, 0.75);
        assert_eq!(cfg.thresholds.alpha_mid, 0.5);
        assert_eq!(cfg.thresholds.alpha_low, 0.25);
        assert_eq!(cfg.pser_decay, 0.4);
        assert_eq!(cfg.pser_window, 5);
        assert_eq!(cfg.eval_episodes, 32);
    }

    #[test]
    fn bad_gamma_is_rejected() {
        let cfg = RunConfig {
            gamma: 1.0,
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
