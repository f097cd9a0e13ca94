//! Minimal reverse-mode differentiation: tensors, a recording tape, Adam,
//! and a finite-difference checker.

mod adam;
mod gradcheck;
mod tape;
mod tensor;

pub use adam::{AdamConfig, AdamState};
pub use gradcheck::{finite_difference_grad, max_relative_error};
pub use tape::{Binary, Gradients, Norm, Reduce, Tape, Unary, Var, LOG_EPS};
pub use tensor::Tensor;
