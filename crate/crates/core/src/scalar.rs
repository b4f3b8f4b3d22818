//! Scalar abstraction over the numeric types the analysis layer runs on:
//! `f64` for Monte Carlo estimates and `BigRational` for exact identities.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{NumOps, One, ToPrimitive, Zero};
use std::fmt::Debug;
use std::ops::Neg;

/// Field-like scalar for probabilities, weights and series coefficients.
pub trait Scalar:
    Clone + Debug + PartialEq + PartialOrd + Zero + One + Neg<Output = Self> + NumOps<Self, Self>
{
    fn from_u64(v: u64) -> Self;

    fn from_i64(v: i64) -> Self;

    /// Exact ratio `num/den`; `den` must be nonzero.
    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_biguint(v: &BigUint) -> Self;

    /// Lossy view used for tolerances and reporting.
    fn to_f64(&self) -> f64;

    /// Whether arithmetic in this scalar is exact (no rounding).
    fn exact() -> bool;
}

impl Scalar for f64 {
    fn from_u64(v: u64) -> Self {
        v as f64
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_biguint(v: &BigUint) -> Self {
        v.to_f64().unwrap_or(f64::INFINITY)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn exact() -> bool {
        false
    }
}

impl Scalar for BigRational {
    fn from_u64(v: u64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_biguint(v: &BigUint) -> Self {
        BigRational::from_integer(BigInt::from(v.clone()))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn exact() -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_roundtrip() {
        let r = <BigRational as Scalar>::from_ratio(3, 10);
        assert!((Scalar::to_f64(&r) - 0.3).abs() < 1e-15);
        assert_eq!(<f64 as Scalar>::from_ratio(3, 10), 0.3);
    }

    #[test]
    fn exactness_flags() {
        assert!(<BigRational as Scalar>::exact());
        assert!(!<f64 as Scalar>::exact());
    }
}
