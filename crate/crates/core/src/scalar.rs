//! Scalar abstraction for the numeric pipeline.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssignOps};

/// Floating-point scalar the image and filter math is generic over.
///
/// Implemented for `f32` and `f64`. Pixel intensities, filter coefficients,
/// polynomial coefficients and singular values are all carried as `T: Real`.
pub trait Real:
    Float + FromPrimitive + NumAssignOps + Sum + Debug + Display + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` constant into the working scalar type.
pub(crate) fn real<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("constant representable in scalar type")
}
