//! Scalar types the analysis code is generic over.
//!
//! EXIT polynomials have integer Bernstein weights, so they can be evaluated
//! exactly over rationals or approximately over `f32`/`f64`. Root finding and
//! curve post-processing need [`num_traits::Float`] on top of this.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive};

/// A field element in which EXIT polynomials can be evaluated.
pub trait Scalar: Num + Clone + PartialOrd + std::fmt::Debug {
    fn from_biguint(v: &BigUint) -> Self;

    fn from_usize(v: usize) -> Self {
        Self::from_biguint(&BigUint::from(v))
    }
}

impl Scalar for f64 {
    fn from_biguint(v: &BigUint) -> Self {
        v.to_f64().unwrap_or(f64::INFINITY)
    }
}

impl Scalar for f32 {
    fn from_biguint(v: &BigUint) -> Self {
        v.to_f32().unwrap_or(f32::INFINITY)
    }
}

impl Scalar for BigRational {
    fn from_biguint(v: &BigUint) -> Self {
        BigRational::from_integer(v.clone().into())
    }
}
