use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Sub};

use num_traits::{One, Zero};

use crate::rational::{self, Rational};

/// Arithmetic the rational-capable algorithms run over: exact rationals
/// for reference runs, `f64` for Monte Carlo throughput.
pub trait Field:
    Clone
    + PartialOrd
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    fn to_rational(&self) -> Option<Rational>;
    fn from_count(n: usize) -> Self;

    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }
}

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rational(r: &Rational) -> Self {
        rational::to_f64(r)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_rational(&self) -> Option<Rational> {
        None
    }
    fn from_count(n: usize) -> Self {
        n as f64
    }
}

impl Field for Rational {
    fn zero() -> Self {
        <Rational as Zero>::zero()
    }
    fn one() -> Self {
        <Rational as One>::one()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        rational::to_f64(self)
    }
    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
    fn from_count(n: usize) -> Self {
        rational::int(n as i64)
    }
}

pub(crate) fn min<T: Field>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}
