use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Real scalar the curvature pipeline is generic over (`f32` or `f64`).
pub trait Scalar: Float + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static {
    /// Lossless-enough conversion from an `f64` literal.
    #[inline]
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Largest absolute value of a slice, zero for an empty slice.
pub fn max_abs<S: Scalar>(values: &[S]) -> S {
    values.iter().fold(S::zero(), |acc, v| acc.max(v.abs()))
}

/// Euclidean dot product of two coordinate vectors.
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// Euclidean norm of a coordinate vector.
pub fn norm<S: Scalar>(a: &[S]) -> S {
    dot(a, a).sqrt()
}
