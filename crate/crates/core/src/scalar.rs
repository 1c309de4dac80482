//! Floating-point abstraction shared by the numeric modules.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar usable throughout the eigen-feature pipeline.
///
/// Implemented for `f32` and `f64`. Text persistence relies on `LowerExp`
/// producing the shortest representation that parses back to the same bits.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + LowerExp
    + FromStr
    + Send
    + Sync
    + 'static
{
    /// Default convergence tolerance for the Jacobi eigensolver, relative to
    /// the Frobenius norm of the input.
    fn default_eigen_tol() -> Self;

    /// Tolerance used when validating unit norms of loaded eigenvectors.
    fn norm_tol() -> Self;

    /// Magnitude below which a computed eigenvalue is treated as zero.
    fn zero_clamp() -> Self;

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl Scalar for f64 {
    fn default_eigen_tol() -> Self {
        1e-12
    }
    fn norm_tol() -> Self {
        1e-9
    }
    fn zero_clamp() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    fn default_eigen_tol() -> Self {
        // 1e-12 sits below f32 resolution.
        8.0 * f32::EPSILON
    }
    fn norm_tol() -> Self {
        1e-5
    }
    fn zero_clamp() -> Self {
        1e-6
    }
}
