//! Scalar abstractions.
//!
//! [`Real`] is the underlying floating point type (`f32` or `f64`). [`Scalar`]
//! is anything an expression or tensor formula can be evaluated over: plain
//! reals, and [`Jet`](crate::jet::Jet)s carrying truncated Taylor data.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{Float, FromPrimitive, ToPrimitive, Zero};

/// Floating point base type: f32 or f64.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, used for literals and tolerances.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Algebra an expression can be evaluated in.
///
/// Elementary functions take `&self` and never fail; callers check the
/// domain with [`Scalar::value`] before calling them.
pub trait Scalar:
    Clone
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    type Real: Real;

    /// The point value (zeroth Taylor coefficient for jets).
    fn value(&self) -> Self::Real;

    /// A constant living in the same algebra as `self`.
    fn lift(&self, c: Self::Real) -> Self;

    /// True when every retained derivative part is zero.
    fn is_constant(&self) -> bool;

    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn powi(&self, k: i32) -> Self;
    fn powf(&self, p: Self::Real) -> Self;
    /// `self ^ e` for a non-constant exponent; requires a positive base.
    fn pow(&self, e: &Self) -> Self;

    fn zero_like(&self) -> Self {
        self.lift(<Self::Real as Zero>::zero())
    }

    fn lift_f64(&self, c: f64) -> Self {
        self.lift(Self::Real::of(c))
    }
}

macro_rules! impl_scalar_for_float {
    ($t:ty) => {
        impl Scalar for $t {
            type Real = $t;

            fn value(&self) -> $t {
                *self
            }
            fn lift(&self, c: $t) -> $t {
                c
            }
            fn is_constant(&self) -> bool {
                true
            }
            fn sqrt(&self) -> $t {
                Float::sqrt(*self)
            }
            fn exp(&self) -> $t {
                Float::exp(*self)
            }
            fn ln(&self) -> $t {
                Float::ln(*self)
            }
            fn sin(&self) -> $t {
                Float::sin(*self)
            }
            fn cos(&self) -> $t {
                Float::cos(*self)
            }
            fn powi(&self, k: i32) -> $t {
                Float::powi(*self, k)
            }
            fn powf(&self, p: $t) -> $t {
                Float::powf(*self, p)
            }
            fn pow(&self, e: &$t) -> $t {
                Float::powf(*self, *e)
            }
        }
    };
}

impl_scalar_for_float!(f32);
impl_scalar_for_float!(f64);

#[cfg(test)]
mod tests {
    use super::*;

    fn hypot<T: Scalar>(a: T, b: T) -> T {
        (a.clone() * a + b.clone() * b).sqrt()
    }

    #[test]
    fn generic_over_both_precisions() {
        assert_eq!(hypot(3.0f64, 4.0), 5.0);
        assert_eq!(hypot(3.0f32, 4.0), 5.0);
        assert_eq!(2.5f64.lift_f64(7.0), 7.0);
    }
}
