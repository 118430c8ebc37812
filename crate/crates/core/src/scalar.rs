use std::fmt;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Scalar type the whole crate is generic over: `f32` or `f64`.
///
/// The default tolerances baked into [`crate::numerics::QuadratureSpec`] and
/// the acceptance goldens target `f64`; `f32` works with loosened tolerances.
pub trait Real:
    Float + FromPrimitive + NumAssign + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + FromPrimitive + NumAssign + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}
