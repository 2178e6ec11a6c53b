//! Sampling-weight schemes for the replay loss.
//!
//! All prioritization here is realized as per-sample weights on a uniformly
//! sampled batch: the expected gradient of a loss under non-uniform sampling
//! equals that of a weighted loss under uniform sampling, so weights and
//! samplers are interchangeable. Every scheme produces nonnegative weights,
//! zeros on masked samples, mean-normalized to 1 over the filled samples.
//!
//! The `macpo` scheme multiplies three per-sample terms: the Bellman
//! residual, a value-enhancement factor `exp(-|Q - Q*|)`, and the joint
//! action probability function
//! `f = 1 + sum_i prod_{j != i} pi_j - n prod_i pi_i`,
//! which peaks at 2 exactly when one agent's taken-action probability is 0
//! and every other agent's is 1. `macpo_approx` replaces `f` with a three
//! level rescale (alpha_high / alpha_mid / alpha_low) chosen from the same
//! probabilities. The remaining schemes are baselines reconstructed in the
//! same weighted-loss form.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Raw weights are clipped at this multiple of the batch mean before
/// normalization; the value-enhancement and joint-probability factors can
/// spike on early batches.
pub const RAW_WEIGHT_CAP_FACTOR: f64 = 10.0;

/// Probability cutoffs and rescale levels for the approximated scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxThresholds {
    /// A probability below this counts as "near zero".
    pub eps_low: f64,
    /// A probability above this counts as "near one".
    pub eps_high: f64,
    pub alpha_high: f64,
    pub alpha_mid: f64,
    pub alpha_low: f64,
}

impl Default for ApproxThresholds {
    fn default() -> Self {
        Self {
            eps_low: 0.1,
            eps_high: 0.9,
            alpha_high: 0.75,
            alpha_mid: 0.5,
            alpha_low: 0.25,
        }
    }
}

impl ApproxThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.eps_low && self.eps_low < self.eps_high && self.eps_high < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "thresholds require 0 < eps_low < eps_high < 1, got {} and {}",
                self.eps_low, self.eps_high
            )));
        }
        if !(self.alpha_low < self.alpha_mid && self.alpha_mid < self.alpha_high) {
            return Err(Error::InvalidConfig(
                "alpha levels must satisfy low < mid < high".into(),
            ));
        }
        Ok(())
    }
}

/// Per-sample ingredients of the weight schemes.
#[derive(Debug, Clone)]
pub struct WeightInputs {
    /// `|Q - y|` against the fixed target.
    pub bellman_error: Vec<f64>,
    /// `|Q - Q*|` against the unrestricted joint-value estimate.
    pub value_gap: Vec<f64>,
    /// Per sample, per agent: probability of the taken action.
    pub taken_probs: Vec<Vec<f64>>,
    /// Padding mask; masked samples receive weight exactly 0.
    pub filled: Vec<bool>,
    /// Consecutive sample ranges, one per episode, for within-episode decay.
    pub episode_ranges: Vec<Range<usize>>,
}

impl WeightInputs {
    pub fn len(&self) -> usize {
        self.bellman_error.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bellman_error.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if self.value_gap.len() != n || self.taken_probs.len() != n || self.filled.len() != n {
            return Err(Error::ShapeMismatch {
                context: "weight inputs",
                expected: n,
                actual: self.value_gap.len().min(self.taken_probs.len()),
            });
        }
        for i in 0..n {
            if !self.filled[i] {
                continue;
            }
            if !self.bellman_error[i].is_finite() || self.bellman_error[i] < 0.0 {
                return Err(Error::NonFinite("bellman error"));
            }
            if !self.value_gap[i].is_finite() || self.value_gap[i] < 0.0 {
                return Err(Error::NonFinite("value gap"));
            }
            for &p in &self.taken_probs[i] {
                if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                    return Err(Error::NonFinite("action probability"));
                }
            }
        }
        let mut covered = 0usize;
        for range in &self.episode_ranges {
            if range.start != covered || range.end > n {
                return Err(Error::ShapeMismatch {
                    context: "weight input episode ranges",
                    expected: covered,
                    actual: range.start,
                });
            }
            covered = range.end;
        }
        if covered != n {
            return Err(Error::ShapeMismatch {
                context: "weight input episode ranges",
                expected: n,
                actual: covered,
            });
        }
        Ok(())
    }
}

/// Normalized per-sample weights plus pre-normalization statistics.
#[derive(Debug, Clone)]
pub struct PriorityWeights {
    pub weights: Vec<f64>,
    /// Mean of the raw (pre-cap, pre-normalization) weights over filled samples.
    pub raw_mean: f64,
    /// Max of the raw weights over filled samples.
    pub raw_max: f64,
}

impl PriorityWeights {
    /// Shannon entropy of the weight distribution over filled samples.
    pub fn entropy(&self) -> f64 {
        let total: f64 = self.weights.iter().sum();
        if total <= 0.0 {
            return 0.0;
        }
        -self
            .weights
            .iter()
            .filter(|&&w| w > 0.0)
            .map(|&w| {
                let p = w / total;
                p * p.ln()
            })
            .sum::<f64>()
    }
}

/// Weighting scheme selected by name in the run configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Macpo,
    MacpoApprox,
    Uniform,
    Per,
    Discor,
    Remern,
    Pser,
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [
        Scheme::Macpo,
        Scheme::MacpoApprox,
        Scheme::Uniform,
        Scheme::Per,
        Scheme::Discor,
        Scheme::Remern,
        Scheme::Pser,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Macpo => "macpo",
            Scheme::MacpoApprox => "macpo_approx",
            Scheme::Uniform => "uniform",
            Scheme::Per => "per",
            Scheme::Discor => "discor",
            Scheme::Remern => "remern",
            Scheme::Pser => "pser",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .iter()
            .copied()
            .find(|scheme| scheme.name() == s)
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown scheme '{s}'; expected one of: {}",
                    Scheme::ALL.map(|s| s.name()).join(", ")
                ))
            })
    }
}

/// Boltzmann probabilities over one agent's available actions.
///
/// Unavailable actions get probability exactly 0; the rest get
/// `exp(q)/sum(exp(q))` stabilized by max-subtraction.
pub fn boltzmann_policy(utilities: &[f64], avail: &[bool]) -> Result<Vec<f64>> {
    if utilities.len() != avail.len() {
        return Err(Error::ShapeMismatch {
            context: "boltzmann policy",
            expected: utilities.len(),
            actual: avail.len(),
        });
    }
    if utilities.iter().any(|u| !u.is_finite()) {
        return Err(Error::NonFinite("utilities"));
    }
    let max = utilities
        .iter()
        .zip(avail)
        .filter(|(_, &a)| a)
        .map(|(&u, _)| u)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::NoAvailableAction { agent: 0 });
    }
    let mut probs = vec![0.0; utilities.len()];
    let mut total = 0.0;
    for (i, (&u, &a)) in utilities.iter().zip(avail).enumerate() {
        if a {
            let e = (u - max).exp();
            probs[i] = e;
            total += e;
        }
    }
    for p in &mut probs {
        *p /= total;
    }
    Ok(probs)
}

/// Per-agent Boltzmann probability vectors.
pub fn boltzmann_policies(utilities: &[Vec<f64>], avail: &[Vec<bool>]) -> Result<Vec<Vec<f64>>> {
    utilities
        .iter()
        .zip(avail)
        .enumerate()
        .map(|(agent, (u, a))| {
            boltzmann_policy(u, a).map_err(|e| match e {
                Error::NoAvailableAction { .. } => Error::NoAvailableAction { agent },
                other => other,
            })
        })
        .collect()
}

/// The joint action probability function
/// `f(pi) = 1 + sum_i prod_{j != i} pi_j - n prod_i pi_i`.
pub fn joint_prob_term(probs: &[f64]) -> f64 {
    let n = probs.len();
    let mut sum_leave_one_out = 0.0;
    for i in 0..n {
        let mut prod = 1.0;
        for (j, &p) in probs.iter().enumerate() {
            if j != i {
                prod *= p;
            }
        }
        sum_leave_one_out += prod;
    }
    let full: f64 = probs.iter().product();
    1.0 + sum_leave_one_out - n as f64 * full
}

/// Exhaustive grid search for the maximum of [`joint_prob_term`] over
/// `[0, 1]^n`.
///
/// Returns the maximum and every grid point attaining it within 1e-12.
/// `step` must divide 1 (e.g. 0.05).
pub fn fmax_oracle(n: usize, step: f64) -> Result<(f64, Vec<Vec<f64>>)> {
    fmax_oracle_with(n, step, joint_prob_term)
}

/// Grid-search oracle over an arbitrary joint-probability function; the
/// verify suite injects mutated functions here to prove the check can fail.
pub fn fmax_oracle_with(
    n: usize,
    step: f64,
    f: impl Fn(&[f64]) -> f64,
) -> Result<(f64, Vec<Vec<f64>>)> {
    if n < 2 {
        return Err(Error::InvalidConfig("fmax oracle needs n >= 2".into()));
    }
    let points_per_dim = (1.0 / step).round() as usize;
    if (points_per_dim as f64 * step - 1.0).abs() > 1e-9 || points_per_dim == 0 {
        return Err(Error::InvalidConfig(format!(
            "grid step {step} does not divide 1"
        )));
    }
    let points_per_dim = points_per_dim + 1;
    let grid: Vec<f64> = (0..points_per_dim)
        .map(|i| (i as f64 * step).min(1.0))
        .collect();

    fn each_point(grid: &[f64], n: usize, mut visit: impl FnMut(&[f64])) {
        let mut indices = vec![0usize; n];
        let mut point = vec![0.0; n];
        loop {
            for (p, &i) in point.iter_mut().zip(&indices) {
                *p = grid[i];
            }
            visit(&point);
            let mut dim = 0;
            loop {
                if dim == n {
                    return;
                }
                indices[dim] += 1;
                if indices[dim] < grid.len() {
                    break;
                }
                indices[dim] = 0;
                dim += 1;
            }
        }
    }

    // first pass finds the maximum, second collects every attaining point
    let mut best = f64::NEG_INFINITY;
    each_point(&grid, n, |point| best = best.max(f(point)));
    let mut maximizers = Vec::new();
    each_point(&grid, n, |point| {
        if (f(point) - best).abs() <= 1e-12 {
            maximizers.push(point.to_vec());
        }
    });
    Ok((best, maximizers))
}

/// Caps raw weights at [`RAW_WEIGHT_CAP_FACTOR`] times the filled mean and
/// normalizes them to mean 1 over filled samples. All-zero raw weights fall
/// back to uniform.
fn normalize_raw(mut raw: Vec<f64>, filled: &[bool]) -> Result<PriorityWeights> {
    let n_filled = filled.iter().filter(|&&f| f).count();
    if n_filled == 0 {
        return Err(Error::EmptyBatch);
    }
    for (w, &keep) in raw.iter_mut().zip(filled) {
        if !keep {
            *w = 0.0;
        } else if !w.is_finite() || *w < 0.0 {
            return Err(Error::NonFinite("raw weight"));
        }
    }
    let raw_sum: f64 = raw.iter().sum();
    let raw_mean = raw_sum / n_filled as f64;
    let raw_max = raw.iter().cloned().fold(0.0, f64::max);
    if raw_mean <= 0.0 {
        // degenerate batch: every raw weight vanished; weight uniformly
        let weights = filled.iter().map(|&f| if f { 1.0 } else { 0.0 }).collect();
        return Ok(PriorityWeights {
            weights,
            raw_mean: 0.0,
            raw_max: 0.0,
        });
    }
    let cap = RAW_WEIGHT_CAP_FACTOR * raw_mean;
    for w in &mut raw {
        if *w > cap {
            *w = cap;
        }
    }
    let capped_mean: f64 = raw.iter().sum::<f64>() / n_filled as f64;
    for w in &mut raw {
        *w /= capped_mean;
    }
    Ok(PriorityWeights {
        weights: raw,
        raw_mean,
        raw_max,
    })
}

/// Exact optimal weights: `|delta| * exp(-gap) * f(pi)`, normalized.
pub fn macpo_exact(inputs: &WeightInputs) -> Result<PriorityWeights> {
    inputs.validate()?;
    let raw = (0..inputs.len())
        .map(|i| {
            inputs.bellman_error[i]
                * (-inputs.value_gap[i]).exp()
                * joint_prob_term(&inputs.taken_probs[i])
        })
        .collect();
    normalize_raw(raw, &inputs.filled)
}

/// Rescale level for one sample of the approximated scheme.
///
/// High when exactly one agent's probability is near zero and every other
/// agent's is near one; low when the joint product is near zero (two or
/// more near-zero probabilities) or near one (all large); medium elsewhere.
pub fn approx_alpha(probs: &[f64], thresholds: &ApproxThresholds) -> f64 {
    let n_low = probs.iter().filter(|&&p| p < thresholds.eps_low).count();
    let n_high = probs.iter().filter(|&&p| p > thresholds.eps_high).count();
    let n = probs.len();
    if n_low == 1 && n_high == n - 1 {
        thresholds.alpha_high
    } else if n_high == n || n_low >= 2 {
        thresholds.alpha_low
    } else {
        thresholds.alpha_mid
    }
}

/// Approximated weights: `|delta| * exp(-gap) * alpha`, normalized.
pub fn macpo_approx(inputs: &WeightInputs, thresholds: &ApproxThresholds) -> Result<PriorityWeights> {
    inputs.validate()?;
    thresholds.validate()?;
    let raw = (0..inputs.len())
        .map(|i| {
            inputs.bellman_error[i]
                * (-inputs.value_gap[i]).exp()
                * approx_alpha(&inputs.taken_probs[i], thresholds)
        })
        .collect();
    normalize_raw(raw, &inputs.filled)
}

/// Plain TD-error prioritization in weighted-loss form.
pub fn per_weights(inputs: &WeightInputs) -> Result<PriorityWeights> {
    inputs.validate()?;
    normalize_raw(inputs.bellman_error.clone(), &inputs.filled)
}

/// Bellman error times value enhancement.
pub fn discor_weights(inputs: &WeightInputs) -> Result<PriorityWeights> {
    inputs.validate()?;
    let raw = (0..inputs.len())
        .map(|i| inputs.bellman_error[i] * (-inputs.value_gap[i]).exp())
        .collect();
    normalize_raw(raw, &inputs.filled)
}

/// Adds the joint taken-action likelihood to the discor form.
pub fn remern_weights(inputs: &WeightInputs) -> Result<PriorityWeights> {
    inputs.validate()?;
    let raw = (0..inputs.len())
        .map(|i| {
            let likelihood: f64 = inputs.taken_probs[i].iter().product();
            inputs.bellman_error[i] * (-inputs.value_gap[i]).exp() * likelihood
        })
        .collect();
    normalize_raw(raw, &inputs.filled)
}

/// Within-episode priority decay: each sample's priority becomes the max of
/// itself and `decay^k` times its k-th predecessor (original values), for
/// `k` up to `window`.
pub fn pser_weights(inputs: &WeightInputs, decay: f64, window: usize) -> Result<PriorityWeights> {
    inputs.validate()?;
    let base = &inputs.bellman_error;
    let mut raw = base.clone();
    for range in &inputs.episode_ranges {
        for t in range.clone() {
            let mut best = base[t];
            let mut factor = 1.0;
            for k in 1..=window {
                if t < range.start + k {
                    break;
                }
                factor *= decay;
                best = best.max(factor * base[t - k]);
            }
            raw[t] = best;
        }
    }
    normalize_raw(raw, &inputs.filled)
}

/// Control baseline: every filled sample weighs exactly 1.
pub fn uniform_weights(inputs: &WeightInputs) -> Result<PriorityWeights> {
    inputs.validate()?;
    let n_filled = inputs.filled.iter().filter(|&&f| f).count();
    if n_filled == 0 {
        return Err(Error::EmptyBatch);
    }
    Ok(PriorityWeights {
        weights: inputs.filled.iter().map(|&f| if f { 1.0 } else { 0.0 }).collect(),
        raw_mean: 1.0,
        raw_max: 1.0,
    })
}

/// Dispatches to the scheme selected in the run configuration.
pub fn compute_weights(
    scheme: Scheme,
    inputs: &WeightInputs,
    thresholds: &ApproxThresholds,
    pser_decay: f64,
    pser_window: usize,
) -> Result<PriorityWeights> {
    match scheme {
        Scheme::Macpo => macpo_exact(inputs),
        Scheme::MacpoApprox => macpo_approx(inputs, thresholds),
        Scheme::Uniform => uniform_weights(inputs),
        Scheme::Per => per_weights(inputs),
        Scheme::Discor => discor_weights(inputs),
        Scheme::Remern => remern_weights(inputs),
        Scheme::Pser => pser_weights(inputs, pser_decay, pser_window),
    }
}
