//! Scalar abstraction shared by the tensor and spectral layers.

use std::fmt::{Debug, Display, LowerExp};
use std::str::FromStr;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real field the complex tensor entries are built on: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + LowerExp
    + FromStr
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`, used for literal constants.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex entry type of a tensor over `T`.
pub type Cx<T> = Complex<T>;

#[inline]
pub(crate) fn is_finite_cx<T: Real>(z: Cx<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}
