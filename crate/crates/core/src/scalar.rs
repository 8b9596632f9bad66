//! Floating-point scalar abstraction the DSP core is generic over.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rustfft::FftNum;
use std::fmt::{Display, LowerExp};
use std::iter::Sum;

/// Sample scalar type: `f32` or `f64`.
///
/// The bound collects what the transforms, the estimators, and the metric
/// code need: FFT support, the usual float operations, conversions from
/// `f64` configuration values, and formatting for reports.
pub trait Scalar:
    FftNum + Float + FloatConst + NumAssign + FromPrimitive + Sum + Display + LowerExp
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Convert an `f64` constant or configuration value into the scalar type.
#[inline]
pub fn cast<T: Scalar>(v: f64) -> T {
    T::from_f64(v).expect("f64 value representable in scalar type")
}

/// Unit-magnitude complex exponential `e^{j*phase}`.
///
/// The phase is evaluated in `f64` before conversion so that long phase
/// ramps do not lose precision in the `f32` instantiation.
#[inline]
pub fn cis<T: Scalar>(phase: f64) -> Complex<T> {
    Complex::new(cast(phase.cos()), cast(phase.sin()))
}
