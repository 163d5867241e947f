//! Integer backends for the censuses.
//!
//! Census loops are generic over [`CensusValue`]; `i128` is used whenever
//! every intermediate fits, and `BigInt` otherwise.

use std::fmt::Debug;
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

pub trait CensusValue: Clone + Ord + Eq + Hash + Send + Sync + Debug + 'static {
    fn from_big(v: &BigInt) -> Option<Self>;
    fn to_big(&self) -> BigInt;
    fn from_i64(v: i64) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul_i64(&self, k: i64) -> Self;
    /// `Some(self / k)` when `k` divides `self` exactly.
    fn quotient_exact(&self, k: i64) -> Option<Self>;
    fn is_zero(&self) -> bool;
    /// Residue in `0..n`.
    fn residue(&self, n: u64) -> u64;
}

impl CensusValue for i128 {
    fn from_big(v: &BigInt) -> Option<Self> {
        v.to_i128()
    }

    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }

    fn from_i64(v: i64) -> Self {
        v as i128
    }

    #[inline]
    fn add(&self, other: &Self) -> Self {
        self + other
    }

    #[inline]
    fn sub(&self, other: &Self) -> Self {
        self - other
    }

    #[inline]
    fn mul_i64(&self, k: i64) -> Self {
        self * k as i128
    }

    #[inline]
    fn quotient_exact(&self, k: i64) -> Option<Self> {
        let k = k as i128;
        (self % k == 0).then(|| self / k)
    }

    #[inline]
    fn is_zero(&self) -> bool {
        *self == 0
    }

    #[inline]
    fn residue(&self, n: u64) -> u64 {
        self.rem_euclid(n as i128) as u64
    }
}

impl CensusValue for BigInt {
    fn from_big(v: &BigInt) -> Option<Self> {
        Some(v.clone())
    }

    fn to_big(&self) -> BigInt {
        self.clone()
    }

    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn sub(&self, other: &Self) -> Self {
        self - other
    }

    fn mul_i64(&self, k: i64) -> Self {
        self * k
    }

    fn quotient_exact(&self, k: i64) -> Option<Self> {
        let (q, r) = self.div_rem(&BigInt::from(k));
        Zero::is_zero(&r).then_some(q)
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn residue(&self, n: u64) -> u64 {
        self.mod_floor(&BigInt::from(n))
            .to_u64()
            .expect("residue is below n")
    }
}

/// Whether every census intermediate bounded by `magnitude` fits in `i128`
/// with headroom for a few additions.
pub fn fits_i128(magnitude: &BigInt) -> bool {
    magnitude.bits() < 120
}
