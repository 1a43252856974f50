//! Floating-point scalar abstraction used by the numeric kernels.
//!
//! Everything below the pipeline layer (matrices, the eigensolver, the
//! statevector simulator, PLS) is generic over [`Scalar`]; the crate root
//! exposes `f64` aliases for the concrete pipeline.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant into `Self`.
    fn real(v: f64) -> Self {
        Self::from_f64(v).expect("constant not representable in scalar type")
    }

    /// Converts a count into `Self`.
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count not representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
