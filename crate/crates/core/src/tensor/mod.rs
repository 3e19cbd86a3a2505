//! Dense complex tensors with grouped indices and Einstein-product algebra.

mod dense;
pub mod fixture;
mod matrix;
mod shape;

pub use dense::{structural_tol, sum_tensors, DenseTensor};
pub use matrix::UnfoldedMatrix;
pub use shape::{multi_index, TensorShape};
