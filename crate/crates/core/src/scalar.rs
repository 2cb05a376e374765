//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point type usable as the state/time scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts a literal constant; panics only for values the type cannot hold at all.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn of_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in scalar type")
    }

    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("index representable in scalar type")
    }

    /// `2^e`, exact for every exponent in the normal range.
    fn pow2(e: i32) -> Self {
        Self::of(2.0).powi(e)
    }

    /// Integer power with a `u32` exponent (effective dimensions are unsigned).
    fn upow(self, e: u32) -> Self {
        self.powi(e as i32)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
