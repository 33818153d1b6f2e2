//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable")
    }

    /// Converts a count into `Self`.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    /// Lossy conversion back to `f64` for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `max(tol, k * EPSILON)`: a fixed tolerance that stays meaningful in low precision.
    #[inline]
    fn tol(tol: f64, k: f64) -> Self {
        let t = Self::c(tol);
        let floor = Self::epsilon() * Self::c(k);
        if t > floor {
            t
        } else {
            floor
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Relative singularity cutoff for factorization pivots (scaled by the largest gram diagonal).
pub fn pivot_tol<T: Real>() -> T {
    T::tol(1e-10, 256.0)
}

/// Margin in the strict inequality `θ < 1`, implemented as `θ <= 1 - margin`.
pub fn theta_margin<T: Real>() -> T {
    T::tol(1e-10, 64.0)
}

/// Window inside which two argmax candidates are treated as tied.
pub fn tie_tol<T: Real>() -> T {
    T::tol(1e-12, 16.0)
}
