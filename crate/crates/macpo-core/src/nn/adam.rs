//! Adam optimizer over parameter blocks.

use crate::error::{Error, Result};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPS: f64 = 1e-8;

/// First/second moment accumulators mirroring a set of parameter blocks.
#[derive(Debug, Clone)]
pub struct AdamState {
    step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(block_lens: &[usize]) -> Self {
        Self {
            step: 0,
            m: block_lens.iter().map(|&n| vec![0.0; n]).collect(),
            v: block_lens.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn for_params(blocks: &[&[f64]]) -> Self {
        let lens: Vec<usize> = blocks.iter().map(|b| b.len()).collect();
        Self::new(&lens)
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Applies one bias-corrected update in place.
    ///
    /// Errors on any non-finite gradient so a diverging run aborts loudly
    /// instead of silently poisoning the parameters.
    pub fn step(
        &mut self,
        params: &mut [&mut [f64]],
        grads: &[Vec<f64>],
        learning_rate: f64,
    ) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::ShapeMismatch {
                context: "adam blocks",
                expected: self.m.len(),
                actual: params.len().max(grads.len()),
            });
        }
        for block in grads {
            if block.iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFinite("gradient"));
            }
        }
        self.step += 1;
        let t = self.step as f64;
        let bc1 = 1.0 - BETA1.powf(t);
        let bc2 = 1.0 - BETA2.powf(t);
        for ((param, grad), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            if param.len() != grad.len() || param.len() != m.len() {
                return Err(Error::ShapeMismatch {
                    context: "adam block size",
                    expected: m.len(),
                    actual: param.len(),
                });
            }
            for i in 0..param.len() {
                let g = grad[i];
                m[i] = BETA1 * m[i] + (1.0 - BETA1) * g;
                v[i] = BETA2 * v[i] + (1.0 - BETA2) * g * g;
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                param[i] -= learning_rate * m_hat / (v_hat.sqrt() + EPS);
            }
        }
        Ok(())
    }
}
