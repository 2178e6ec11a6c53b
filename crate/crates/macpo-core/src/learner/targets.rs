//! TD(lambda) return targets computed backward over each episode.

use std::ops::Range;

/// Backward recursion per episode:
///
/// ```text
/// y[t] = r[t]                                       if terminated[t] or last row
/// y[t] = r[t] + gamma * ((1 - lambda) * v[t + 1] + lambda * y[t + 1])   otherwise
/// ```
///
/// where `values[t]` is the (target network) state-action value at row `t`.
/// A truncated episode without a stored successor bootstraps 0, i.e. is
/// treated as terminal.
pub fn td_lambda_targets(
    rewards: &[f64],
    terminated: &[bool],
    values: &[f64],
    episode_ranges: &[Range<usize>],
    gamma: f64,
    lambda: f64,
) -> Vec<f64> {
    let mut targets = vec![0.0; rewards.len()];
    for range in episode_ranges {
        for t in range.clone().rev() {
            targets[t] = if terminated[t] || t + 1 == range.end {
                rewards[t]
            } else {
                rewards[t] + gamma * ((1.0 - lambda) * values[t + 1] + lambda * targets[t + 1])
            };
        }
    }
    targets
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_zero_is_one_step_bootstrap() {
        let rewards = [1.0, 2.0, 3.0];
        let terminated = [false, false, true];
        let values = [9.0, 5.0, 7.0];
        let y = td_lambda_targets(&rewards, &terminated, &values, &[0..3], 0.9, 0.0);
        assert!((y[2] - 3.0).abs() < 1e-15);
        assert!((y[1] - (2.0 + 0.9 * 7.0)).abs() < 1e-15);
        assert!((y[0] - (1.0 + 0.9 * 5.0)).abs() < 1e-15);
    }

    #[test]
    fn lambda_one_is_monte_carlo_return() {
        let rewards = [1.0, 2.0, 3.0, 4.0];
        let terminated = [false, false, false, true];
        let values = [100.0; 4]; // must be ignored entirely at lambda = 1
        let y = td_lambda_targets(&rewards, &terminated, &values, &[0..4], 0.5, 1.0);
        // discounted returns: y[t] = sum_k gamma^k r[t+k]
        assert!((y[3] - 4.0).abs() < 1e-15);
        assert!((y[2] - (3.0 + 0.5 * 4.0)).abs() < 1e-15);
        assert!((y[1] - (2.0 + 0.5 * (3.0 + 0.5 * 4.0))).abs() < 1e-15);
        assert!((y[0] - (1.0 + 0.5 * (2.0 + 0.5 * (3.0 + 0.5 * 4.0)))).abs() < 1e-15);
    }

    #[test]
    fn lambda_mid_matches_hand_unrolled_recursion() {
        // 3-step episode, gamma 0.9, lambda 0.6, hand-set rewards and values
        let rewards = [1.0, -2.0, 5.0];
        let terminated = [false, false, true];
        let values = [0.0, 4.0, -1.0];
        let y = td_lambda_targets(&rewards, &terminated, &values, &[0..3], 0.9, 0.6);
        let y2 = 5.0;
        let y1 = -2.0 + 0.9 * (0.4 * -1.0 + 0.6 * y2);
        let y0 = 1.0 + 0.9 * (0.4 * 4.0 + 0.6 * y1);
        assert!((y[2] - y2).abs() < 1e-15);
        assert!((y[1] - y1).abs() < 1e-15);
        assert!((y[0] - y0).abs() < 1e-15);
    }

    #[test]
    fn episodes_do_not_leak_into_each_other() {
        let rewards = [1.0, 2.0, 10.0, 20.0];
        let terminated = [false, true, false, true];
        let values = [0.0, 0.0, 0.0, 3.0];
        let y = td_lambda_targets(&rewards, &terminated, &values, &[0..2, 2..4], 0.9, 0.6);
        assert!((y[1] - 2.0).abs() < 1e-15);
        assert!((y[0] - (1.0 + 0.9 * (0.4 * 0.0 + 0.6 * 2.0))).abs() < 1e-15);
        assert!((y[3] - 20.0).abs() < 1e-15);
        assert!((y[2] - (10.0 + 0.9 * (0.4 * 3.0 + 0.6 * 20.0))).abs() < 1e-15);
    }

    #[test]
    fn truncation_without_terminal_flag_bootstraps_zero() {
        let rewards = [1.0, 2.0];
        let terminated = [false, false];
        let values = [5.0, 5.0];
        let y = td_lambda_targets(&rewards, &terminated, &values, &[0..2], 0.9, 0.6);
        assert!((y[1] - 2.0).abs() < 1e-15);
    }
}
