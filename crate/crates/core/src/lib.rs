//! Referential fabric inspection: find defects in a test image by comparing
//! it against a known-good reference image of the same fabric.
//!
//! The pipeline runs in six phases:
//!
//! 1. **Resolution matching** – decode, grayscale conversion, bilinear resize.
//! 2. **Enhancement** – histogram specification against the reference followed
//!    by median-mean sub-image clipped histogram equalization (MMSICHE).
//! 3. **Registration** – Harris corners, NCC patch matching, RANSAC affine
//!    estimation, and bilinear warping of the test image onto the reference grid.
//! 4. **Subtraction** – absolute difference, double thresholding, hysteresis,
//!    and the binary defect-present decision.
//! 5. **Edge extraction** – zero-phase high-pass Butterworth filtering realized
//!    with sparse banded matrices, applied row- and column-wise.
//! 6. **Fault detection** – per-tile similarity from the numerical rank of the
//!    Sylvester matrix of the tiles' characteristic polynomials.
//!
//! The numeric modules are generic over the [`Real`] scalar (`f32` or `f64`);
//! the [`pipeline`] orchestration runs in `f64`.

pub mod config;
pub mod edgefilter;
pub mod enhance;
pub mod error;
pub mod eval;
pub mod image;
pub mod linalg;
pub mod mask;
pub mod pipeline;
pub mod register;
pub mod scalar;
pub mod subtract;
pub mod sylvester;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Real;

/// Grayscale image with `f32` samples.
pub type GrayImageF32 = image::GrayImage<f32>;
/// Grayscale image with `f64` samples (the pipeline's working type).
pub type GrayImageF64 = image::GrayImage<f64>;
/// Edge-magnitude image with `f32` samples.
pub type EdgeImageF32 = edgefilter::EdgeImage<f32>;
/// Edge-magnitude image with `f64` samples.
pub type EdgeImageF64 = edgefilter::EdgeImage<f64>;
