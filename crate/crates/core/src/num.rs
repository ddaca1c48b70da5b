//! Scalar abstraction: `f32` or `f64`.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar every numeric routine in this crate is generic over.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` constant into `T`.
#[inline]
pub fn cast<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("constant must be representable in the scalar type")
}

/// Numeric tolerances in this crate are stated for `f64`; for coarser scalars
/// the same check is floored at a small multiple of the machine epsilon so it
/// stays meaningful in `f32`.
#[inline]
pub fn scaled_tol<T: Real>(base: f64) -> T {
    let floor = T::epsilon() * cast::<T>(32.0);
    let base = cast::<T>(base);
    if base > floor {
        base
    } else {
        floor
    }
}
