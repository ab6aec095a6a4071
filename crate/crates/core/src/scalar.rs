//! Scalar abstractions shared by the numerical modules.
//!
//! Real-valued code (quadrature, Green tables, torus points) is generic over
//! [`Real`], implemented for `f32` and `f64`. Polynomial coefficients are
//! generic over [`Coefficient`], implemented for the primitive signed
//! integers and for [`num_bigint::BigInt`].

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Float, FromPrimitive, NumAssign, Signed, ToPrimitive};

/// Floating point type used by the numerical modules.
pub trait Real:
    Float + FromPrimitive + NumAssign + Sum + Send + Sync + Debug + Display + Default + 'static
{
    /// Round-off floor used for accuracy bookkeeping: a result computed with
    /// a few thousand floating point operations is never claimed to be more
    /// accurate than this.
    fn roundoff_floor() -> Self {
        Self::epsilon() * Self::from_f64(500.0).unwrap()
    }

    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).unwrap()
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap()
    }

    fn from_usize_lossy(x: usize) -> Self {
        Self::from_usize(x).unwrap()
    }

    fn from_i64_lossy(x: i64) -> Self {
        Self::from_i64(x).unwrap()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Exact integer coefficient ring for Laurent polynomials.
pub trait Coefficient:
    Clone + Integer + Signed + NumAssign + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    fn to_bigint(&self) -> BigInt;
}

macro_rules! impl_coefficient {
    ($($t:ty),*) => {
        $(impl Coefficient for $t {
            fn to_bigint(&self) -> BigInt {
                BigInt::from(*self)
            }
        })*
    };
}

impl_coefficient!(i32, i64, i128);

impl Coefficient for BigInt {
    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
}
