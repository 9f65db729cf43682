//! Scalar abstraction for the numerical kernels.
//!
//! Everything in [`crate::spectral`] and [`crate::dynamics`] is generic over a
//! real scalar `T: Real`; `f64` is the working instantiation and `f32` is kept
//! compiling as a cheap guard against accidental f64-only shortcuts.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rustfft::FftNum;
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

/// The scalar bound: IEEE float arithmetic, math constants, conversions from
/// primitives, compound assignment, and rustfft compatibility.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + FftNum + Sum + Display + LowerExp + Debug
{
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + NumAssign + FftNum + Sum + Display + LowerExp + Debug
{
}

/// Shorthand for the ubiquitous f64 → T literal conversion.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal must convert into the scalar type")
}

/// |n|^α for an integer mode index.
#[inline]
pub fn mode_pow<T: Real>(n: i64, alpha: T) -> T {
    if n == 0 {
        T::zero()
    } else {
        real::<T>(n.unsigned_abs() as f64).powf(alpha)
    }
}

/// Japanese bracket ⟨n⟩ = (1+n²)^{1/2}.
#[inline]
pub fn bracket<T: Real>(n: i64) -> T {
    let nf = real::<T>(n as f64);
    (T::one() + nf * nf).sqrt()
}
