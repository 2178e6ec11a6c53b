//! One-step cooperative matrix game.
//!
//! The payoff tensor is fully enumerable, which makes this environment the
//! exactly solvable oracle for weight and learner checks: the optimal joint
//! action is a brute-force argmax over at most a few hundred entries.

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::types::JointAction;

use super::{Environment, Snapshot, StepResult};

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGameSpec {
    /// Action count per agent; the payoff tensor has shape `m_1 x ... x m_n`.
    pub n_actions: Vec<usize>,
    /// Row-major payoff tensor (last agent's action varies fastest).
    pub payoff: Vec<f64>,
}

impl MatrixGameSpec {
    pub fn new(n_actions: Vec<usize>, payoff: Vec<f64>) -> Self {
        Self { n_actions, payoff }
    }

    /// Two-agent game from a square payoff table.
    pub fn two_agent(table: &[&[f64]]) -> Self {
        let rows = table.len();
        let cols = table[0].len();
        let mut payoff = Vec::with_capacity(rows * cols);
        for row in table {
            assert_eq!(row.len(), cols, "ragged payoff table");
            payoff.extend_from_slice(row);
        }
        Self::new(vec![rows, cols], payoff)
    }

    pub fn n_agents(&self) -> usize {
        self.n_actions.len()
    }

    pub fn n_entries(&self) -> usize {
        self.n_actions.iter().product()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_actions.len() < 2 {
            return Err(Error::InvalidConfig("matrix game needs >= 2 agents".into()));
        }
        if self.n_actions.iter().any(|&m| m == 0) {
            return Err(Error::InvalidConfig("every agent needs >= 1 action".into()));
        }
        if self.payoff.len() != self.n_entries() {
            return Err(Error::InvalidConfig(format!(
                "payoff tensor has {} entries, shape wants {}",
                self.payoff.len(),
                self.n_entries()
            )));
        }
        if self.payoff.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidConfig("payoff must be finite".into()));
        }
        Ok(())
    }

    fn flat_index(&self, actions: &[usize]) -> Result<usize> {
        if actions.len() != self.n_agents() {
            return Err(Error::ShapeMismatch {
                context: "matrix game joint action",
                expected: self.n_agents(),
                actual: actions.len(),
            });
        }
        let mut index = 0;
        for (agent, (&action, &m)) in actions.iter().zip(&self.n_actions).enumerate() {
            if action >= m {
                return Err(Error::UnavailableAction { agent, action });
            }
            index = index * m + action;
        }
        Ok(index)
    }

    /// Payoff tensor lookup.
    pub fn payoff_at(&self, actions: &[usize]) -> Result<f64> {
        Ok(self.payoff[self.flat_index(actions)?])
    }

    /// Exhaustive-enumeration argmax over all joint actions
    /// (first in lexicographic order on ties).
    pub fn joint_argmax(&self) -> Vec<usize> {
        let n = self.n_agents();
        let mut best_actions = vec![0; n];
        let mut best = f64::NEG_INFINITY;
        let mut actions = vec![0usize; n];
        loop {
            let payoff = self.payoff_at(&actions).unwrap();
            if payoff > best {
                best = payoff;
                best_actions = actions.clone();
            }
            // odometer over joint actions, last agent fastest
            let mut dim = n;
            loop {
                if dim == 0 {
                    return best_actions;
                }
                dim -= 1;
                actions[dim] += 1;
                if actions[dim] < self.n_actions[dim] {
                    break;
                }
                actions[dim] = 0;
                if dim == 0 {
                    return best_actions;
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct MatrixGameEnv {
    spec: MatrixGameSpec,
    max_actions: usize,
    done: bool,
}

impl MatrixGameEnv {
    pub fn new(spec: MatrixGameSpec) -> Self {
        let max_actions = spec.n_actions.iter().copied().max().unwrap_or(1);
        Self {
            spec,
            max_actions,
            done: true,
        }
    }

    pub fn spec(&self) -> &MatrixGameSpec {
        &self.spec
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            state: vec![1.0],
            obs: vec![vec![1.0]; self.spec.n_agents()],
            avail: self
                .spec
                .n_actions
                .iter()
                .map(|&m| (0..self.max_actions).map(|a| a < m).collect())
                .collect(),
        }
    }
}

impl Environment for MatrixGameEnv {
    fn n_agents(&self) -> usize {
        self.spec.n_agents()
    }

    fn n_actions(&self) -> usize {
        self.max_actions
    }

    fn obs_dim(&self) -> usize {
        1
    }

    fn state_dim(&self) -> usize {
        1
    }

    fn episode_limit(&self) -> usize {
        1
    }

    fn reset(&mut self, _rng: &mut Rng) -> Result<Snapshot> {
        self.done = false;
        Ok(self.snapshot())
    }

    fn step(&mut self, actions: &JointAction, _rng: &mut Rng) -> Result<StepResult> {
        if self.done {
            return Err(Error::EpisodeFinished);
        }
        let reward = self.spec.payoff_at(&actions.actions)?;
        self.done = true;
        Ok(StepResult {
            reward,
            terminated: true,
            snapshot: self.snapshot(),
        })
    }

    fn render(&self) -> String {
        format!(
            "matrix game: {} agents, actions {:?}\n",
            self.spec.n_agents(),
            self.spec.n_actions
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_payoff_lookup() {
        let spec = MatrixGameSpec::two_agent(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let mut env = MatrixGameEnv::new(spec);
        let mut rng = Rng::seeded(0);
        env.reset(&mut rng).unwrap();
        let result = env.step(&JointAction::new(vec![0, 0]), &mut rng).unwrap();
        assert_eq!(result.reward, 1.0);
        assert!(result.terminated);
    }

    #[test]
    fn symmetric_tensor_is_agent_order_invariant() {
        let spec = MatrixGameSpec::two_agent(&[&[3.0, 1.0], &[1.0, 2.0]]);
        for (a, b) in [(0usize, 1usize), (1, 0), (0, 0), (1, 1)] {
            assert_eq!(
                spec.payoff_at(&[a, b]).unwrap(),
                spec.payoff_at(&[b, a]).unwrap()
            );
        }
    }

    #[test]
    fn joint_argmax_matches_hand_enumeration() {
        let mut rng = Rng::seeded(12);
        for _ in 0..20 {
            let shape = vec![2 + rng.index(3), 2 + rng.index(3), 2 + rng.index(2)];
            let entries: usize = shape.iter().product();
            let payoff: Vec<f64> = (0..entries).map(|_| rng.range(-5.0, 5.0)).collect();
            let spec = MatrixGameSpec::new(shape.clone(), payoff.clone());
            let fast = spec.joint_argmax();
            // independent route: scan the flat tensor, decode the index
            let (best_flat, _) = payoff
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
                    if v > bv {
                        (i, v)
                    } else {
                        (bi, bv)
                    }
                });
            let mut decoded = vec![0usize; shape.len()];
            let mut rest = best_flat;
            for dim in (0..shape.len()).rev() {
                decoded[dim] = rest % shape[dim];
                rest /= shape[dim];
            }
            assert_eq!(fast, decoded);
            assert_eq!(
                spec.payoff_at(&fast).unwrap(),
                payoff.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            );
        }
    }

    #[test]
    fn out_of_range_action_is_rejected() {
        let spec = MatrixGameSpec::two_agent(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let mut env = MatrixGameEnv::new(spec);
        let mut rng = Rng::seeded(0);
        env.reset(&mut rng).unwrap();
        assert!(matches!(
            env.step(&JointAction::new(vec![0, 2]), &mut rng),
            Err(Error::UnavailableAction { agent: 1, action: 2 })
        ));
    }

    #[test]
    fn ragged_action_counts_mask_extra_actions() {
        let spec = MatrixGameSpec::new(vec![2, 3], vec![0.0; 6]);
        let mut env = MatrixGameEnv::new(spec);
        let snap = env.reset(&mut Rng::seeded(0)).unwrap();
        assert_eq!(env.n_actions(), 3);
        assert_eq!(snap.avail[0], vec![true, true, false]);
        assert_eq!(snap.avail[1], vec![true, true, true]);
    }
}
