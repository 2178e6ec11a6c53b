//! Finite-difference gradient probes.
//!
//! These are the independent oracle for every analytic backward pass in the
//! crate: they only ever call forward evaluation, so agreement with
//! [`Mlp::backward`](crate::nn::Mlp::backward) and the mixer backward passes
//! is a genuine two-route check. Used by both the test suites and the
//! `verify` command.

/// Central finite-difference gradients of `eval` w.r.t. every parameter of
/// `subject`, in `params_of` block order.
///
/// The step is scaled per parameter: `h = step * max(1, |theta|)`.
pub fn fd_gradients<T: Clone>(
    subject: &T,
    params_of: impl Fn(&mut T) -> Vec<&mut [f64]>,
    mut eval: impl FnMut(&T) -> f64,
    step: f64,
) -> Vec<Vec<f64>> {
    let mut work = subject.clone();
    let lens: Vec<usize> = params_of(&mut work).iter().map(|b| b.len()).collect();
    let mut grads: Vec<Vec<f64>> = lens.iter().map(|&n| vec![0.0; n]).collect();
    for (b, &len) in lens.iter().enumerate() {
        for i in 0..len {
            let orig = params_of(&mut work)[b][i];
            let h = step * orig.abs().max(1.0);
            params_of(&mut work)[b][i] = orig + h;
            let f_plus = eval(&work);
            params_of(&mut work)[b][i] = orig - h;
            let f_minus = eval(&work);
            params_of(&mut work)[b][i] = orig;
            grads[b][i] = (f_plus - f_minus) / (2.0 * h);
        }
    }
    grads
}

/// Worst relative disagreement between analytic and numeric gradients.
///
/// Per entry: `|a - n| / max(|a|, |n|, 1e-3)`; the floor keeps near-zero
/// gradients from dividing noise by noise.
pub fn max_relative_error(analytic: &[Vec<f64>], numeric: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (a_block, n_block) in analytic.iter().zip(numeric) {
        for (&a, &n) in a_block.iter().zip(n_block) {
            let denom = a.abs().max(n.abs()).max(1e-3);
            worst = worst.max((a - n).abs() / denom);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::matrix::Matrix;
    use crate::nn::mlp::{Activation, Mlp};
    use crate::rng::Rng;

    #[test]
    fn fd_recovers_gradient_of_simple_scalar_net() {
        // f(theta) = output of a 1-layer identity net on a fixed input;
        // gradients are known in closed form.
        let mut rng = Rng::seeded(2);
        let net = Mlp::new(&[2, 1], Activation::Elu, Activation::Identity, &mut rng);
        let x = Matrix::from_vec(1, 2, vec![0.7, -1.3]);
        let grads = fd_gradients(
            &net,
            |n| n.param_blocks_mut(),
            |n| n.forward(&x).unwrap().get(0, 0),
            1e-5,
        );
        // dW[i] = x[i], db = 1
        assert!((grads[0][0] - 0.7).abs() < 1e-8);
        assert!((grads[0][1] + 1.3).abs() < 1e-8);
        assert!((grads[1][0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn relative_error_uses_floor_for_tiny_gradients() {
        let a = vec![vec![1e-9, 1.0]];
        let n = vec![vec![0.0, 1.0001]];
        let err = max_relative_error(&a, &n);
        assert!(err < 2e-4, "err {err}");
    }
}
