//! Scalar abstraction: all numeric code is generic over `f32`/`f64`.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar the library is generic over.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Shorthand for lossy conversion from `f64` constants.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
