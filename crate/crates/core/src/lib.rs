//! Stockwell scattering network for pixel-wise change detection.
//!
//! Pipeline building blocks, bottom-up:
//!
//! - [`grid`]: real/complex rasters, 2-D DFT, circular shifts
//! - [`stransform`]: three-parameter Stockwell windows and the directional filter bank
//! - [`scattering`]: cascaded filter/modulus propagation and lowpass outputs
//! - [`features`]: per-pixel bitemporal feature vectors, standardization, balanced sampling
//! - [`svm`]: Gaussian-kernel SVM trained by SMO
//! - [`eval`]: confusion counts, PCC and kappa
//! - [`datagen`]: synthetic speckled scene pairs with known truth
//!
//! Every numerical type is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common double-precision instantiations.

pub mod datagen;
pub mod error;
pub mod eval;
pub mod features;
pub mod grid;
pub mod scalar;
pub mod scattering;
pub mod stransform;
pub mod svm;

pub use error::{Error, Result};
pub use rustfft::num_complex::Complex;
pub use scalar::Scalar;

pub type RealField64 = grid::RealField<f64>;
pub type RealField32 = grid::RealField<f32>;
pub type ComplexField64 = grid::ComplexField<f64>;
pub type ComplexField32 = grid::ComplexField<f32>;
pub type ParameterSet64 = stransform::ParameterSet<f64>;
pub type FilterBank64 = stransform::FilterBank<f64>;
pub type FilterBank32 = stransform::FilterBank<f32>;
pub type ScatteringMaps64 = scattering::ScatteringMaps<f64>;
pub type PixelFeatureMatrix64 = features::PixelFeatureMatrix<f64>;
pub type SvmModel64 = svm::SvmModel<f64>;
pub type SvmModel32 = svm::SvmModel<f32>;
