//! Minimal differentiable function approximators: dense matrices, MLPs with
//! manual backprop, Adam, and the two mixing networks.

pub mod adam;
pub mod check;
pub mod matrix;
pub mod mixer;
pub mod mlp;

pub use adam::AdamState;
pub use matrix::Matrix;
pub use mixer::{MonotonicMixer, UnrestrictedMixer};
pub use mlp::{Activation, Grads, Layer, Mlp};
