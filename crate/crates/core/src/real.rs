//! Scalar traits shared by the kernels.
//!
//! Per-point update formulas are written against [`Arith`] so the same code
//! path can be evaluated on floats or on the symbolic scalar used by the
//! cost model in [`crate::bench`].

use std::fmt::{Debug, Display};
use std::ops::{Add, AddAssign, Mul, Sub};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Minimal arithmetic needed by the per-point stencil formulas.
pub trait Arith: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {}

impl<T> Arith for T where T: Copy + Add<Output = T> + Sub<Output = T> + Mul<Output = T> {}

/// Floating-point type a wavefield can be stored in (`f32` or `f64`).
pub trait Real:
    Float + FromPrimitive + ToPrimitive + AddAssign + Arith + Default + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, rounding to nearest.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is always convertible")
    }

    fn f64(self) -> f64 {
        self.to_f64().expect("float is always convertible")
    }
}

impl Real for f32 {}
impl Real for f64 {}
