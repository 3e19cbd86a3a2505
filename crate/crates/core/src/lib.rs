//! Einstein-product tensor algebra and generalized Hanson-Wright tail bounds
//! for random tensors, with Monte Carlo machinery that checks every bound
//! against simulated tails.
//!
//! The tensor and spectral layers are generic over the real scalar ([`Real`]);
//! the probabilistic layers work in `f64` through the aliases below.

pub mod bounds;
pub mod ensembles;
pub mod error;
pub mod quadform;
pub mod scalar;
pub mod spectral;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::{Cx, Real};

/// Double-precision complex tensor, the default value type.
pub type Tensor = tensor::DenseTensor<f64>;
pub type Tensor32 = tensor::DenseTensor<f32>;
pub type Matrix = tensor::UnfoldedMatrix<f64>;
pub type Matrix32 = tensor::UnfoldedMatrix<f32>;
pub type Svd = spectral::SpectralDecomposition<f64>;
pub type Eig = spectral::EigDecomposition<f64>;
