//! The two numeric backends: exact [`Rational`] and `f64`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{de::DeserializeOwned, Serialize};

use crate::rational::Rational;

/// Number type usable as an interval endpoint.
///
/// `EXACT` backends never round, so merges use a zero tolerance and set
/// equalities are identities. Floating backends merge across gaps no wider
/// than [`Scalar::default_merge_eps`].
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn from_i64(v: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn total_cmp(&self, other: &Self) -> Ordering;
    fn default_merge_eps() -> Self;
    /// The exact value, on the exact backend only.
    fn as_rational(&self) -> Option<Rational>;

    fn signum(&self) -> i32 {
        match self.total_cmp(&Self::zero()) {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        }
    }

    fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b.total_cmp(&a) == Ordering::Less {
            b
        } else {
            a
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b.total_cmp(&a) == Ordering::Greater {
            b
        } else {
            a
        }
    }

    fn midpoint(a: &Self, b: &Self) -> Self {
        (a.clone() + b.clone()) / Self::from_i64(2)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Rational::zero()
    }
    fn one() -> Self {
        Rational::one()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(v)
    }
    fn to_f64(&self) -> f64 {
        Rational::to_f64(self)
    }
    fn as_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
    fn default_merge_eps() -> Self {
        Rational::zero()
    }
    fn signum(&self) -> i32 {
        Rational::signum(self)
    }
}

/// Default merge tolerance of the floating backend.
pub const DEFAULT_FLOAT_EPS: f64 = 1e-12;

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rational(r: &Rational) -> Self {
        r.to_f64()
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn as_rational(&self) -> Option<Rational> {
        None
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }
    fn default_merge_eps() -> Self {
        DEFAULT_FLOAT_EPS
    }
    fn signum(&self) -> i32 {
        // -0.0 counts as zero.
        if *self > 0.0 {
            1
        } else if *self < 0.0 {
            -1
        } else {
            0
        }
    }
}
