//! Scalar fields the polynomial and moment code runs over.
//!
//! Everything public works in `f64`. The orthogonality oracle reruns the same
//! algebra over exact rationals ([`Exact`]): every `f64` is a dyadic rational,
//! so converting the inputs loses nothing and the Gram test is free of the
//! cancellation that ruins monomial-basis inner products past degree ~8.

use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};
use std::fmt::Debug;

/// Exact rational scalar used by the oracles.
pub type Exact = BigRational;

pub trait Scalar: Num + Signed + Clone + Debug + PartialOrd {
    /// Exact for [`Exact`]; panics on non-finite input.
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    fn from_f64(x: f64) -> Self {
        <BigRational as FromPrimitive>::from_f64(x).expect("finite input")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}
