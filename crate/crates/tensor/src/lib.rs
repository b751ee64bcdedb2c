//! Minimal dense-tensor engine with reverse-mode differentiation.
//!
//! Supplies every operation the gaze pipeline needs: convolutions and their
//! transpose, pooling, dense layers, pointwise math, softmax, reductions,
//! and the two losses, all recorded on a [`Graph`] for a single reverse
//! sweep. Double precision backs the gradient-check suite in [`check`];
//! training runs in single precision.

pub mod check;
mod error;
mod graph;
pub mod io;
pub mod ops;
mod tensor;

pub use error::{Result, TensorError};
pub use graph::{Graph, Var};
pub use tensor::{idx4, Element, Tensor};
