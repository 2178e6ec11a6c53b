//! Flat key=value configuration files with sections.
//!
//! ```text
//! [run]
//! scheme = macpo
//! seed = 1
//! [env]
//! variant = predator_prey
//! grid_w = 7
//! ```
//!
//! Unknown keys are rejected by name. Missing keys keep their defaults, so
//! a config file only needs the values it changes. `--set section.key=value`
//! overrides use the same setters. In the `[env]` section the `variant` key
//! must come before variant-specific keys (the canonical form writes it
//! first).

use anyhow::{anyhow, bail, Context, Result};
use std::fmt::Write as _;
use std::path::Path;

use macpo_core::config::RunConfig;
use macpo_core::env::{EnvSpec, MatrixGameSpec, PredatorPreySpec};
use macpo_core::priority::Scheme;

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut section = String::new();
    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            section = line[1..line.len() - 1].trim().to_string();
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected key = value, got '{raw}'", line_no + 1))?;
        set_key(&mut cfg, &section, key.trim(), value.trim())
            .with_context(|| format!("line {}", line_no + 1))?;
    }
    cfg.validate().map_err(|e| anyhow!("{e}"))?;
    Ok(cfg)
}

/// Applies one `section.key=value` override.
pub fn apply_override(cfg: &mut RunConfig, spec: &str) -> Result<()> {
    let (path, value) = spec
        .split_once('=')
        .ok_or_else(|| anyhow!("override '{spec}' is not of the form section.key=value"))?;
    let (section, key) = path
        .trim()
        .split_once('.')
        .ok_or_else(|| anyhow!("override key '{path}' is not of the form section.key"))?;
    set_key(cfg, section.trim(), key.trim(), value.trim())
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| anyhow!("key '{key}': cannot parse '{value}'"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        other => bail!("key '{key}': expected true/false, got '{other}'"),
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|part| parse_num::<T>(key, part.trim()))
        .collect()
}

fn set_key(cfg: &mut RunConfig, section: &str, key: &str, value: &str) -> Result<()> {
    let full = format!("{section}.{key}");
    match (section, key) {
        ("run", "scheme") => {
            cfg.scheme = value.parse::<Scheme>().map_err(|e| anyhow!("{e}"))?;
        }
        ("run", "seed") => cfg.seed = parse_num(&full, value)?,
        ("run", "step_max") => cfg.step_max = parse_num(&full, value)?,
        ("run", "deterministic") => cfg.deterministic = parse_bool(&full, value)?,
        ("run", "eval_interval") => cfg.eval_interval = parse_num(&full, value)?,
        ("run", "eval_episodes") => cfg.eval_episodes = parse_num(&full, value)?,
        ("run", "checkpoint_interval") => cfg.checkpoint_interval = parse_num(&full, value)?,

        ("env", "variant") => match value {
            "predator_prey" => {
                if !matches!(cfg.env, EnvSpec::PredatorPrey(_)) {
                    cfg.env = EnvSpec::PredatorPrey(PredatorPreySpec::scaled(0.0));
                }
            }
            "matrix_game" => {
                if !matches!(cfg.env, EnvSpec::MatrixGame(_)) {
                    cfg.env = EnvSpec::MatrixGame(MatrixGameSpec::new(
                        vec![2, 2],
                        vec![1.0, 0.0, 0.0, 1.0],
                    ));
                }
            }
            other => bail!("key 'env.variant': unknown variant '{other}'"),
        },
        ("env", _) => match &mut cfg.env {
            EnvSpec::PredatorPrey(spec) => match key {
                "grid_w" => spec.grid_w = parse_num(&full, value)?,
                "grid_h" => spec.grid_h = parse_num(&full, value)?,
                "n_predators" => spec.n_predators = parse_num(&full, value)?,
                "n_prey" => spec.n_prey = parse_num(&full, value)?,
                "punishment" => spec.punishment = parse_num(&full, value)?,
                "capture_reward" => spec.capture_reward = parse_num(&full, value)?,
                "obs_window" => spec.obs_window = parse_num(&full, value)?,
                "episode_limit" => spec.episode_limit = parse_num(&full, value)?,
                _ => bail!("unknown config key '{full}' for predator_prey"),
            },
            EnvSpec::MatrixGame(spec) => match key {
                "actions" => spec.n_actions = parse_list(&full, value)?,
                "payoff" => spec.payoff = parse_list(&full, value)?,
                _ => bail!("unknown config key '{full}' for matrix_game"),
            },
        },

        ("learning", "batch_size") => cfg.batch_size = parse_num(&full, value)?,
        ("learning", "buffer_capacity") => cfg.buffer_capacity = parse_num(&full, value)?,
        ("learning", "target_update_interval") => {
            cfg.target_update_interval = parse_num(&full, value)?
        }
        ("learning", "learning_rate") => cfg.learning_rate = parse_num(&full, value)?,
        ("learning", "td_lambda") => cfg.td_lambda = parse_num(&full, value)?,
        ("learning", "gamma") => cfg.gamma = parse_num(&full, value)?,
        ("learning", "grad_norm_clip") => cfg.grad_norm_clip = parse_num(&full, value)?,
        ("learning", "epsilon_start") => cfg.epsilon_start = parse_num(&full, value)?,
        ("learning", "epsilon_finish") => cfg.epsilon_finish = parse_num(&full, value)?,
        ("learning", "epsilon_anneal_steps") => {
            cfg.epsilon_anneal_steps = parse_num(&full, value)?
        }
        ("learning", "min_buffer_episodes") => cfg.min_buffer_episodes = parse_num(&full, value)?,
        ("learning", "updates_per_episode") => cfg.updates_per_episode = parse_num(&full, value)?,

        ("priority", "alpha_high") => cfg.thresholds.alpha_high = parse_num(&full, value)?,
        ("priority", "alpha_mid") => cfg.thresholds.alpha_mid = parse_num(&full, value)?,
        ("priority", "alpha_low") => cfg.thresholds.alpha_low = parse_num(&full, value)?,
        ("priority", "eps_low") => cfg.thresholds.eps_low = parse_num(&full, value)?,
        ("priority", "eps_high") => cfg.thresholds.eps_high = parse_num(&full, value)?,
        ("priority", "pser_decay") => cfg.pser_decay = parse_num(&full, value)?,
        ("priority", "pser_window") => cfg.pser_window = parse_num(&full, value)?,

        ("model", "agent_hidden") => cfg.agent_hidden = parse_num(&full, value)?,
        ("model", "mixing_embed") => cfg.mixing_embed = parse_num(&full, value)?,
        ("model", "hypernet_hidden") => cfg.hypernet_hidden = parse_num(&full, value)?,
        ("model", "qstar_hidden") => cfg.qstar_hidden = parse_num(&full, value)?,

        _ => bail!("unknown config key '{full}'"),
    }
    Ok(())
}

/// Canonical serialized form: every key, fixed order.
pub fn serialize_config(cfg: &RunConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "[run]");
    let _ = writeln!(out, "scheme = {}", cfg.scheme);
    let _ = writeln!(out, "seed = {}", cfg.seed);
    let _ = writeln!(out, "step_max = {}", cfg.step_max);
    let _ = writeln!(out, "deterministic = {}", cfg.deterministic);
    let _ = writeln!(out, "eval_interval = {}", cfg.eval_interval);
    let _ = writeln!(out, "eval_episodes = {}", cfg.eval_episodes);
    let _ = writeln!(out, "checkpoint_interval = {}", cfg.checkpoint_interval);
    let _ = writeln!(out, "[env]");
    match &cfg.env {
        EnvSpec::PredatorPrey(spec) => {
            let _ = writeln!(out, "variant = predator_prey");
            let _ = writeln!(out, "grid_w = {}", spec.grid_w);
            let _ = writeln!(out, "grid_h = {}", spec.grid_h);
            let _ = writeln!(out, "n_predators = {}", spec.n_predators);
            let _ = writeln!(out, "n_prey = {}", spec.n_prey);
            let _ = writeln!(out, "punishment = {}", spec.punishment);
            let _ = writeln!(out, "capture_reward = {}", spec.capture_reward);
            let _ = writeln!(out, "obs_window = {}", spec.obs_window);
            let _ = writeln!(out, "episode_limit = {}", spec.episode_limit);
        }
        EnvSpec::MatrixGame(spec) => {
            let _ = writeln!(out, "variant = matrix_game");
            let actions: Vec<String> = spec.n_actions.iter().map(|a| a.to_string()).collect();
            let _ = writeln!(out, "actions = {}", actions.join(","));
            let payoff: Vec<String> = spec.payoff.iter().map(|p| p.to_string()).collect();
            let _ = writeln!(out, "payoff = {}", payoff.join(","));
        }
    }
    let _ = writeln!(out, "[learning]");
    let _ = writeln!(out, "batch_size = {}", cfg.batch_size);
    let _ = writeln!(out, "buffer_capacity = {}", cfg.buffer_capacity);
    let _ = writeln!(out, "target_update_interval = {}", cfg.target_update_interval);
    let _ = writeln!(out, "learning_rate = {}", cfg.learning_rate);
    let _ = writeln!(out, "td_lambda = {}", cfg.td_lambda);
    let _ = writeln!(out, "gamma = {}", cfg.gamma);
    let _ = writeln!(out, "grad_norm_clip = {}", cfg.grad_norm_clip);
    let _ = writeln!(out, "epsilon_start = {}", cfg.epsilon_start);
    let _ = writeln!(out, "epsilon_finish = {}", cfg.epsilon_finish);
    let _ = writeln!(out, "epsilon_anneal_steps = {}", cfg.epsilon_anneal_steps);
    let _ = writeln!(out, "min_buffer_episodes = {}", cfg.min_buffer_episodes);
    let _ = writeln!(out, "updates_per_episode = {}", cfg.updates_per_episode);
    let _ = writeln!(out, "[priority]");
    let _ = writeln!(out, "alpha_high = {}", cfg.thresholds.alpha_high);
    let _ = writeln!(out, "alpha_mid = {}", cfg.thresholds.alpha_mid);
    let _ = writeln!(out, "alpha_low = {}", cfg.thresholds.alpha_low);
    let _ = writeln!(out, "eps_low = {}", cfg.thresholds.eps_low);
    let _ = writeln!(out, "eps_high = {}", cfg.thresholds.eps_high);
    let _ = writeln!(out, "pser_decay = {}", cfg.pser_decay);
    let _ = writeln!(out, "pser_window = {}", cfg.pser_window);
    let _ = writeln!(out, "[model]");
    let _ = writeln!(out, "agent_hidden = {}", cfg.agent_hidden);
    let _ = writeln!(out, "mixing_embed = {}", cfg.mixing_embed);
    let _ = writeln!(out, "hypernet_hidden = {}", cfg.hypernet_hidden);
    let _ = writeln!(out, "qstar_hidden = {}", cfg.qstar_hidden);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_default_config() {
        let cfg = RunConfig::default();
        let text = serialize_config(&cfg);
        let parsed = parse_config(&text).unwrap();
        assert_eq!(parsed, cfg);
    }

    #[test]
    fn round_trip_matrix_game_config() {
        let mut cfg = RunConfig::default();
        cfg.env = EnvSpec::MatrixGame(MatrixGameSpec::new(
            vec![3, 3],
            vec![8.0, -12.0, -12.0, -12.0, 0.0, 0.0, -12.0, 0.0, 0.25],
        ));
        cfg.scheme = Scheme::MacpoApprox;
        cfg.learning_rate = 0.0005;
        let text = serialize_config(&cfg);
        let parsed = parse_config(&text).unwrap();
        assert_eq!(parsed, cfg);
    }

    #[test]
    fn unknown_key_is_named_in_the_error() {
        let err = parse_config("[learning]\nbatch_sizes = 128\n").unwrap_err();
        assert!(format!("{err:#}").contains("learning.batch_sizes"), "{err:#}");
    }

    #[test]
    fn unknown_scheme_is_rejected() {
        let err = parse_config("[run]\nscheme = bananas\n").unwrap_err();
        assert!(format!("{err:#}").contains("bananas"));
    }

    #[test]
    fn overrides_apply_and_reject_bad_paths() {
        let mut cfg = RunConfig::default();
        apply_override(&mut cfg, "run.seed=77").unwrap();
        apply_override(&mut cfg, "learning.gamma = 0.95").unwrap();
        assert_eq!(cfg.seed, 77);
        assert_eq!(cfg.gamma, 0.95);
        assert!(apply_override(&mut cfg, "nonsense").is_err());
        assert!(apply_override(&mut cfg, "learning.nope=1").is_err());
    }

    #[test]
    fn comments_and_blanks_are_ignored()  {
        let text = "# top comment\n\n[run]\nseed = 5  # trailing\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.seed, 5);
    }
}
