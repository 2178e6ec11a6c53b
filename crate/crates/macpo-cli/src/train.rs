//! The end-to-end training loop: collect an episode, store it, take one or
//! more weighted updates, evaluate greedily on a schedule, and stream
//! metrics to CSV.

use anyhow::{anyhow, Context, Result};
use std::path::{Path, PathBuf};
use std::time::Instant;

use macpo_core::buffer::ReplayBuffer;
use macpo_core::config::RunConfig;
use macpo_core::learner::checkpoint::save_checkpoint;
use macpo_core::learner::{rollout, EpsilonSchedule, LearnerState, TrainStepMetrics};
use macpo_core::rng::Rng;

use crate::eval::{evaluate_policy, mean};
use crate::metrics::{MetricsRow, MetricsWriter};

// Training rng stream ids (evaluation uses its own, see eval.rs).
const ENV_STREAM: u64 = 0;
const ACTION_STREAM: u64 = 1;
const SAMPLE_STREAM: u64 = 2;
const INIT_STREAM: u64 = 3;

#[derive(Debug, Clone, Default)]
pub struct TrainOptions {
    /// Print one ASCII frame per step of every training episode.
    pub render: bool,
    /// Suppress the per-evaluation progress lines.
    pub quiet: bool,
    /// Stop as soon as an evaluation mean reaches this reward.
    pub early_stop_reward: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub final_eval_mean: f64,
    pub best_eval_mean: f64,
    /// (env_steps, mean eval reward) per evaluation point.
    pub eval_history: Vec<(u64, f64)>,
    pub env_steps: u64,
    pub episodes: u64,
    pub train_steps: u64,
    pub metrics_path: PathBuf,
    pub checkpoint_path: PathBuf,
    pub wall_seconds: f64,
    pub stopped_early: bool,
}

/// Runs training to `step_max` environment steps (or an early stop),
/// writing `metrics.csv`, periodic checkpoints and `final.ckpt` under
/// `out_dir`.
pub fn run_training(cfg: &RunConfig, out_dir: &Path, opts: &TrainOptions) -> Result<TrainOutcome> {
    cfg.validate().map_err(|e| anyhow!("{e}"))?;
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let started = Instant::now();

    let mut env = cfg.env.build().map_err(|e| anyhow!("{e}"))?;
    let shape = env.episode_shape();
    let mut env_rng = Rng::stream(cfg.seed, ENV_STREAM);
    let mut action_rng = Rng::stream(cfg.seed, ACTION_STREAM);
    let mut sample_rng = Rng::stream(cfg.seed, SAMPLE_STREAM);
    let mut init_rng = Rng::stream(cfg.seed, INIT_STREAM);
    let mut learner = LearnerState::new(cfg.clone(), shape, &mut init_rng);
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity, shape);
    let schedule = EpsilonSchedule::from_config(cfg);
    let mut metrics = MetricsWriter::create(&out_dir.join("metrics.csv"))?;

    let mut last_train: Option<TrainStepMetrics> = None;
    let mut eval_history: Vec<(u64, f64)> = Vec::new();
    let mut next_eval: u64 = 0;
    let mut eval_index: u64 = 0;
    let mut next_checkpoint: u64 = if cfg.checkpoint_interval > 0 {
        cfg.checkpoint_interval as u64
    } else {
        u64::MAX
    };
    let mut stopped_early = false;

    'outer: loop {
        while learner.env_steps >= next_eval {
            let rewards = evaluate_policy(
                &cfg.env,
                &learner.live.agent,
                cfg.eval_episodes,
                cfg.seed,
                eval_index,
            )?;
            let eval_mean = mean(&rewards);
            eval_history.push((learner.env_steps, eval_mean));
            let row = metrics_row(cfg, &learner, &schedule, last_train.as_ref(), eval_mean, &started);
            metrics.write_row(&row)?;
            if !opts.quiet {
                println!(
                    "steps {:>8}  episodes {:>6}  updates {:>6}  eval reward {:>8.3}  eps {:.3}",
                    row.env_steps, row.episodes, row.train_steps, row.mean_episode_reward, row.epsilon
                );
            }
            eval_index += 1;
            next_eval += cfg.eval_interval as u64;
            if let Some(threshold) = opts.early_stop_reward {
                if eval_mean >= threshold {
                    stopped_early = true;
                    break 'outer;
                }
            }
        }
        if learner.env_steps >= cfg.step_max as u64 {
            break;
        }

        let start_step = learner.env_steps as usize;
        let outcome = if opts.render {
            let mut stdout = std::io::stdout();
            rollout(
                env.as_mut(),
                &learner.live.agent,
                &schedule,
                start_step,
                &mut env_rng,
                &mut action_rng,
                Some(&mut stdout),
            )
        } else {
            rollout(
                env.as_mut(),
                &learner.live.agent,
                &schedule,
                start_step,
                &mut env_rng,
                &mut action_rng,
                None,
            )
        }
        .map_err(|e| anyhow!("{e}"))?;
        learner.env_steps += outcome.episode.length() as u64;
        learner.episodes_seen += 1;
        buffer.insert(outcome.episode).map_err(|e| anyhow!("{e}"))?;
        learner.maybe_update_targets();

        if buffer.len() >= cfg.min_buffer_episodes {
            for _ in 0..cfg.updates_per_episode {
                let batch = buffer
                    .sample(cfg.batch_size, &mut sample_rng)
                    .map_err(|e| anyhow!("{e}"))?;
                last_train = Some(learner.train_step(&batch).map_err(|e| anyhow!("{e}"))?);
            }
        }

        if learner.env_steps >= next_checkpoint {
            let path = out_dir.join(format!("step_{}.ckpt", learner.env_steps));
            save_checkpoint(&path, &learner).map_err(|e| anyhow!("{e}"))?;
            next_checkpoint += cfg.checkpoint_interval as u64;
        }
    }

    // final evaluation row when the loop ended between eval boundaries
    let final_eval_mean = match eval_history.last() {
        Some(&(steps, reward)) if steps == learner.env_steps => reward,
        _ => {
            let rewards = evaluate_policy(
                &cfg.env,
                &learner.live.agent,
                cfg.eval_episodes,
                cfg.seed,
                eval_index,
            )?;
            let eval_mean = mean(&rewards);
            eval_history.push((learner.env_steps, eval_mean));
            let row = metrics_row(cfg, &learner, &schedule, last_train.as_ref(), eval_mean, &started);
            metrics.write_row(&row)?;
            eval_mean
        }
    };

    let checkpoint_path = out_dir.join("final.ckpt");
    save_checkpoint(&checkpoint_path, &learner).map_err(|e| anyhow!("{e}"))?;
    let best_eval_mean = eval_history
        .iter()
        .map(|&(_, r)| r)
        .fold(f64::NEG_INFINITY, f64::max);
    let wall_seconds = started.elapsed().as_secs_f64();
    if !opts.quiet {
        println!(
            "done: scheme {} seed {} steps {} episodes {} updates {} final eval {:.3} ({:.1}s)",
            cfg.scheme,
            cfg.seed,
            learner.env_steps,
            learner.episodes_seen,
            learner.train_steps,
            final_eval_mean,
            wall_seconds
        );
    }
    Ok(TrainOutcome {
        final_eval_mean,
        best_eval_mean,
        eval_history,
        env_steps: learner.env_steps,
        episodes: learner.episodes_seen,
        train_steps: learner.train_steps,
        metrics_path: metrics.path().to_path_buf(),
        checkpoint_path,
        wall_seconds,
        stopped_early,
    })
}

fn metrics_row(
    cfg: &RunConfig,
    learner: &LearnerState,
    schedule: &EpsilonSchedule,
    last_train: Option<&TrainStepMetrics>,
    eval_mean: f64,
    started: &Instant,
) -> MetricsRow {
    MetricsRow {
        env_steps: learner.env_steps,
        episodes: learner.episodes_seen,
        train_steps: learner.train_steps,
        mean_episode_reward: eval_mean,
        loss: last_train.map_or(0.0, |m| m.loss),
        weight_raw_mean: last_train.map_or(0.0, |m| m.weight_raw_mean),
        weight_raw_max: last_train.map_or(0.0, |m| m.weight_raw_max),
        weight_entropy: last_train.map_or(0.0, |m| m.weight_entropy),
        epsilon: schedule.at(learner.env_steps as usize),
        wall_seconds: if cfg.deterministic {
            0.0
        } else {
            started.elapsed().as_secs_f64()
        },
    }
}
