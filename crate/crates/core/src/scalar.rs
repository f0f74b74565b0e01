//! Scalar abstraction for the numeric parts of the library.
//!
//! All LP and rounding arithmetic is generic over [`Scalar`] so the same
//! code runs in `f32` or `f64`. Combinatorial quantities (satisfying
//! times, cover sizes, thresholds) stay in integer types regardless.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar used by the LP engine, the relaxation and the
/// rounding scheme.
pub trait Scalar:
    Float + NumAssign + Sum + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Default absolute feasibility tolerance for LP solves.
    const FEAS_TOL: Self;
    /// Default violation threshold for constraint separation.
    const SEP_TOL: Self;

    fn from_f64_lossy(x: f64) -> Self;
    fn from_usize_lossy(x: usize) -> Self;
    fn to_f64_lossy(self) -> f64;
}

impl Scalar for f64 {
    const FEAS_TOL: Self = 1e-7;
    const SEP_TOL: Self = 1e-6;

    #[inline]
    fn from_f64_lossy(x: f64) -> Self {
        x
    }
    #[inline]
    fn from_usize_lossy(x: usize) -> Self {
        x as f64
    }
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    const FEAS_TOL: Self = 1e-4;
    const SEP_TOL: Self = 1e-3;

    #[inline]
    fn from_f64_lossy(x: f64) -> Self {
        x as f32
    }
    #[inline]
    fn from_usize_lossy(x: usize) -> Self {
        x as f32
    }
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

/// Default scalar for the crate-level type aliases.
pub type DefaultScalar = f64;
