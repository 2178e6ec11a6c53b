//! Mixing networks that combine per-agent utilities into a joint value.
//!
//! [`MonotonicMixer`] is the QMIX-style state-conditioned mix: hypernetworks
//! produce the mixing weights from the global state, and an absolute value
//! on those weights makes the joint value monotone in every utility.
//! [`UnrestrictedMixer`] drops the sign constraint entirely and serves as
//! the estimate of the optimal joint value.

use crate::error::{Error, Result};
use crate::nn::matrix::Matrix;
use crate::nn::mlp::{Activation, Grads, Mlp, MlpCache};
use crate::rng::Rng;

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicMixer {
    /// state -> n_agents * embed mixing weights (before abs).
    pub hyper_w1: Mlp,
    /// state -> embed bias, plain affine.
    pub hyper_b1: Mlp,
    /// state -> embed output weights (before abs).
    pub hyper_w2: Mlp,
    /// state -> scalar state value, the output bias.
    pub hyper_v: Mlp,
    pub n_agents: usize,
    pub embed_dim: usize,
}

pub struct MonotonicCache {
    w1_cache: MlpCache,
    b1_cache: MlpCache,
    w2_cache: MlpCache,
    v_cache: MlpCache,
    w1_raw: Matrix,
    w2_raw: Matrix,
    pre_mix: Matrix,
    hidden: Matrix,
    utilities: Matrix,
    rows: usize,
}

impl MonotonicMixer {
    pub fn new(
        state_dim: usize,
        n_agents: usize,
        embed_dim: usize,
        hyper_hidden: usize,
        rng: &mut Rng,
    ) -> Self {
        Self {
            hyper_w1: Mlp::new(
                &[state_dim, hyper_hidden, n_agents * embed_dim],
                Activation::Elu,
                Activation::Identity,
                rng,
            ),
            hyper_b1: Mlp::new(&[state_dim, embed_dim], Activation::Elu, Activation::Identity, rng),
            hyper_w2: Mlp::new(
                &[state_dim, hyper_hidden, embed_dim],
                Activation::Elu,
                Activation::Identity,
                rng,
            ),
            hyper_v: Mlp::new(
                &[state_dim, hyper_hidden, 1],
                Activation::Elu,
                Activation::Identity,
                rng,
            ),
            n_agents,
            embed_dim,
        }
    }

    pub fn state_dim(&self) -> usize {
        self.hyper_w1.input_dim()
    }

    fn check(&self, states: &Matrix, utilities: &Matrix) -> Result<()> {
        if states.cols() != self.state_dim() {
            return Err(Error::ShapeMismatch {
                context: "mixer state input",
                expected: self.state_dim(),
                actual: states.cols(),
            });
        }
        if utilities.cols() != self.n_agents || utilities.rows() != states.rows() {
            return Err(Error::ShapeMismatch {
                context: "mixer utility input",
                expected: self.n_agents * states.rows(),
                actual: utilities.cols() * utilities.rows(),
            });
        }
        Ok(())
    }

    /// Joint value per row.
    pub fn forward(&self, states: &Matrix, utilities: &Matrix) -> Result<Vec<f64>> {
        self.check(states, utilities)?;
        let w1_raw = self.hyper_w1.forward(states)?;
        let b1 = self.hyper_b1.forward(states)?;
        let w2_raw = self.hyper_w2.forward(states)?;
        let v = self.hyper_v.forward(states)?;
        Ok(self.mix(&w1_raw, &b1, &w2_raw, &v, utilities).0)
    }

    pub fn forward_cached(
        &self,
        states: &Matrix,
        utilities: &Matrix,
    ) -> Result<(Vec<f64>, MonotonicCache)> {
        self.check(states, utilities)?;
        let (w1_raw, w1_cache) = self.hyper_w1.forward_cached(states)?;
        let (b1, b1_cache) = self.hyper_b1.forward_cached(states)?;
        let (w2_raw, w2_cache) = self.hyper_w2.forward_cached(states)?;
        let (v, v_cache) = self.hyper_v.forward_cached(states)?;
        let (q_tot, pre_mix, hidden) = self.mix(&w1_raw, &b1, &w2_raw, &v, utilities);
        Ok((
            q_tot,
            MonotonicCache {
                w1_cache,
                b1_cache,
                w2_cache,
                v_cache,
                w1_raw,
                w2_raw,
                pre_mix,
                hidden,
                utilities: utilities.clone(),
                rows: states.rows(),
            },
        ))
    }

    fn mix(
        &self,
        w1_raw: &Matrix,
        b1: &Matrix,
        w2_raw: &Matrix,
        v: &Matrix,
        utilities: &Matrix,
    ) -> (Vec<f64>, Matrix, Matrix) {
        let (n, embed) = (self.n_agents, self.embed_dim);
        let rows = utilities.rows();
        let mut pre_mix = Matrix::zeros(rows, embed);
        let mut hidden = Matrix::zeros(rows, embed);
        let mut q_tot = Vec::with_capacity(rows);
        for r in 0..rows {
            let q = utilities.row(r);
            let w1 = w1_raw.row(r);
            {
                let pre = pre_mix.row_mut(r);
                pre.copy_from_slice(b1.row(r));
                for (a, &qa) in q.iter().enumerate().take(n) {
                    let w_row = &w1[a * embed..(a + 1) * embed];
                    for (p, &w) in pre.iter_mut().zip(w_row) {
                        *p += qa * w.abs();
                    }
                }
            }
            let mut total = v.get(r, 0);
            {
                let pre = pre_mix.row(r);
                let h = hidden.row_mut(r);
                for ((hv, &p), &w2) in h.iter_mut().zip(pre).zip(w2_raw.row(r)) {
                    *hv = Activation::Elu.apply(p);
                    total += *hv * w2.abs();
                }
            }
            q_tot.push(total);
        }
        (q_tot, pre_mix, hidden)
    }

    /// Backpropagates per-row joint-value gradients.
    ///
    /// Returns hypernetwork parameter gradients (in `param_blocks` order)
    /// and the gradient w.r.t. the utility inputs.
    pub fn backward(&self, cache: &MonotonicCache, d_q_tot: &[f64]) -> Result<(Grads, Matrix)> {
        if d_q_tot.len() != cache.rows {
            return Err(Error::ShapeMismatch {
                context: "mixer backward gradient",
                expected: cache.rows,
                actual: d_q_tot.len(),
            });
        }
        let (n, embed) = (self.n_agents, self.embed_dim);
        let rows = cache.rows;
        let mut d_w1_raw = Matrix::zeros(rows, n * embed);
        let mut d_b1 = Matrix::zeros(rows, embed);
        let mut d_w2_raw = Matrix::zeros(rows, embed);
        let mut d_v = Matrix::zeros(rows, 1);
        let mut d_utilities = Matrix::zeros(rows, n);
        for r in 0..rows {
            let g = d_q_tot[r];
            d_v.set(r, 0, g);
            let h = cache.hidden.row(r);
            let pre = cache.pre_mix.row(r);
            let w2 = cache.w2_raw.row(r);
            let w1 = cache.w1_raw.row(r);
            let q = cache.utilities.row(r);
            // output layer of the mix
            let d_pre: Vec<f64> = (0..embed)
                .map(|e| {
                    d_w2_raw.set(r, e, g * h[e] * sign(w2[e]));
                    g * w2[e].abs() * Activation::Elu.derivative(pre[e])
                })
                .collect();
            d_b1.row_mut(r).copy_from_slice(&d_pre);
            for a in 0..n {
                let w_row = &w1[a * embed..(a + 1) * embed];
                let d_w_row = &mut d_w1_raw.row_mut(r)[a * embed..(a + 1) * embed];
                let mut dq = 0.0;
                for e in 0..embed {
                    d_w_row[e] = q[a] * d_pre[e] * sign(w_row[e]);
                    dq += w_row[e].abs() * d_pre[e];
                }
                d_utilities.set(r, a, dq);
            }
        }
        let (g_w1, _) = self.hyper_w1.backward(&cache.w1_cache, &d_w1_raw)?;
        let (g_b1, _) = self.hyper_b1.backward(&cache.b1_cache, &d_b1)?;
        let (g_w2, _) = self.hyper_w2.backward(&cache.w2_cache, &d_w2_raw)?;
        let (g_v, _) = self.hyper_v.backward(&cache.v_cache, &d_v)?;
        Ok((Grads::concat(vec![g_w1, g_b1, g_w2, g_v]), d_utilities))
    }

    pub fn param_blocks(&self) -> Vec<&[f64]> {
        let mut blocks = self.hyper_w1.param_blocks();
        blocks.extend(self.hyper_b1.param_blocks());
        blocks.extend(self.hyper_w2.param_blocks());
        blocks.extend(self.hyper_v.param_blocks());
        blocks
    }

    pub fn param_blocks_mut(&mut self) -> Vec<&mut [f64]> {
        let mut blocks = self.hyper_w1.param_blocks_mut();
        blocks.extend(self.hyper_b1.param_blocks_mut());
        blocks.extend(self.hyper_w2.param_blocks_mut());
        blocks.extend(self.hyper_v.param_blocks_mut());
        blocks
    }

    pub fn n_params(&self) -> usize {
        self.param_blocks().iter().map(|b| b.len()).sum()
    }
}

/// Sign-unconstrained joint-value head over `[state | utilities]`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnrestrictedMixer {
    pub net: Mlp,
    pub n_agents: usize,
    state_dim: usize,
}

pub struct UnrestrictedCache {
    net_cache: MlpCache,
    rows: usize,
}

impl UnrestrictedMixer {
    pub fn new(
        state_dim: usize,
        n_agents: usize,
        hidden: usize,
        rng: &mut Rng,
    ) -> Self {
        Self {
            net: Mlp::new(
                &[state_dim + n_agents, hidden, hidden, 1],
                Activation::Elu,
                Activation::Identity,
                rng,
            ),
            n_agents,
            state_dim,
        }
    }

    /// Rebuilds a mixer around an existing network; the state width is
    /// whatever the network input leaves after the utility slots.
    pub fn from_net(net: Mlp, n_agents: usize) -> Self {
        let state_dim = net.input_dim() - n_agents;
        Self {
            net,
            n_agents,
            state_dim,
        }
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    fn joined(&self, states: &Matrix, utilities: &Matrix) -> Result<Matrix> {
        if states.cols() != self.state_dim
            || utilities.cols() != self.n_agents
            || states.rows() != utilities.rows()
        {
            return Err(Error::ShapeMismatch {
                context: "unrestricted mixer input",
                expected: self.state_dim + self.n_agents,
                actual: states.cols() + utilities.cols(),
            });
        }
        let rows = states.rows();
        let mut joined = Matrix::zeros(rows, self.state_dim + self.n_agents);
        for r in 0..rows {
            let row = joined.row_mut(r);
            row[..self.state_dim].copy_from_slice(states.row(r));
            row[self.state_dim..].copy_from_slice(utilities.row(r));
        }
        Ok(joined)
    }

    pub fn forward(&self, states: &Matrix, utilities: &Matrix) -> Result<Vec<f64>> {
        let joined = self.joined(states, utilities)?;
        let out = self.net.forward(&joined)?;
        Ok(out.data().to_vec())
    }

    pub fn forward_cached(
        &self,
        states: &Matrix,
        utilities: &Matrix,
    ) -> Result<(Vec<f64>, UnrestrictedCache)> {
        let joined = self.joined(states, utilities)?;
        let rows = joined.rows();
        let (out, net_cache) = self.net.forward_cached(&joined)?;
        Ok((out.data().to_vec(), UnrestrictedCache { net_cache, rows }))
    }

    /// Parameter gradients and the gradient w.r.t. the utility inputs.
    pub fn backward(&self, cache: &UnrestrictedCache, d_out: &[f64]) -> Result<(Grads, Matrix)> {
        if d_out.len() != cache.rows {
            return Err(Error::ShapeMismatch {
                context: "unrestricted backward gradient",
                expected: cache.rows,
                actual: d_out.len(),
            });
        }
        let d_mat = Matrix::from_vec(cache.rows, 1, d_out.to_vec());
        let (grads, d_joined) = self.net.backward(&cache.net_cache, &d_mat)?;
        let mut d_utilities = Matrix::zeros(cache.rows, self.n_agents);
        for r in 0..cache.rows {
            d_utilities
                .row_mut(r)
                .copy_from_slice(&d_joined.row(r)[self.state_dim..]);
        }
        Ok((grads, d_utilities))
    }

    pub fn param_blocks(&self) -> Vec<&[f64]> {
        self.net.param_blocks()
    }

    pub fn param_blocks_mut(&mut self) -> Vec<&mut [f64]> {
        self.net.param_blocks_mut()
    }
}
