use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar type the filters and diagnostics are generic over.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` constant.
    #[inline]
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 constant representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Squared Euclidean distance, accumulated in `f64`.
#[inline]
pub fn squared_distance<T: Scalar>(u: &[T], v: &[T]) -> T {
    let mut acc = 0.0f64;
    for (a, b) in u.iter().zip(v) {
        let d = (*a - *b).as_f64();
        acc += d * d;
    }
    T::of(acc)
}
