//! Outward-rounded interval arithmetic.
//!
//! An [`Interval`] is a closed interval `[lo, hi]` of representable numbers
//! that is guaranteed to contain some exact real quantity. Every operation
//! returns an interval containing the exact image of its operands; the empty
//! set is represented as `None` wherever it can arise.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{self, Round, Scalar};

/// A nonempty closed interval with finite representable bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval<T> {
    lo: T,
    hi: T,
}

/// The representable number nearest to the decimal (or hex-float) literal,
/// ties to even.
pub fn repr<T: Scalar>(literal: &str) -> Result<T> {
    T::parse_literal(literal).ok_or_else(|| Error::InvalidConfig(format!("not a finite number: {literal:?}")))
}

/// A representable number `<= ln(x)`, at most 2 ulp below it.
pub fn log_lo<T: Scalar>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::NonPositiveLog(x.to_f64_exact()));
    }
    if x == T::one() {
        return Ok(T::zero());
    }
    let r = x.ln();
    let d = r.next_down();
    // Just above a power of two the ulp below is half the ulp above, so a
    // faithful result may sit a full lower-binade ulp too high.
    if r > T::zero() && (r - d) + (r - d) == r.next_up() - r {
        Ok(d.next_down())
    } else {
        Ok(d)
    }
}

fn checked<T: Scalar>(lo: T, hi: T) -> Result<Interval<T>> {
    if lo.is_infinite() || hi.is_infinite() {
        return Err(Error::Overflow);
    }
    Interval::new(lo, hi)
}

impl<T: Scalar> Interval<T> {
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if lo.is_finite() && hi.is_finite() && lo <= hi {
            Ok(Self { lo, hi })
        } else {
            Err(Error::InvalidBounds { lo: lo.to_f64_exact(), hi: hi.to_f64_exact() })
        }
    }

    pub fn point(x: T) -> Self {
        assert!(x.is_finite(), "point enclosure of a non-finite value");
        Self { lo: x, hi: x }
    }

    #[inline]
    pub fn lo(&self) -> T {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> T {
        self.hi
    }

    /// Width rounded upward.
    pub fn width(&self) -> T {
        scalar::sub(self.hi, self.lo, Round::Up)
    }

    pub fn contains(&self, x: T) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Self) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(T::zero())
    }

    /// Smallest magnitude of any element.
    pub fn mig(&self) -> T {
        if self.contains_zero() {
            T::zero()
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    /// Largest magnitude of any element.
    pub fn mag(&self) -> T {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        checked(scalar::add(self.lo, other.lo, Round::Down), scalar::add(self.hi, other.hi, Round::Up))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        checked(scalar::sub(self.lo, other.hi, Round::Down), scalar::sub(self.hi, other.lo, Round::Up))
    }

    pub fn neg(&self) -> Self {
        Self { lo: -self.hi, hi: -self.lo }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let pairs = [(self.lo, other.lo), (self.lo, other.hi), (self.hi, other.lo), (self.hi, other.hi)];
        let lo = pairs.iter().map(|&(a, b)| scalar::mul(a, b, Round::Down)).fold(T::infinity(), T::min);
        let hi = pairs.iter().map(|&(a, b)| scalar::mul(a, b, Round::Up)).fold(T::neg_infinity(), T::max);
        checked(lo, hi)
    }

    /// Multiplication by a power of two; exact barring underflow.
    pub fn scale_pow2(&self, factor: T) -> Result<Self> {
        self.mul(&Self::point(factor))
    }

    pub fn square(&self) -> Result<Self> {
        let (lo, hi) = if self.lo >= T::zero() {
            (scalar::mul(self.lo, self.lo, Round::Down), scalar::mul(self.hi, self.hi, Round::Up))
        } else if self.hi <= T::zero() {
            (scalar::mul(self.hi, self.hi, Round::Down), scalar::mul(self.lo, self.lo, Round::Up))
        } else {
            let m = self.mag();
            (T::zero(), scalar::mul(m, m, Round::Up))
        };
        checked(lo.max(T::zero()), hi)
    }

    pub fn sqrt(&self) -> Result<Self> {
        if self.lo < T::zero() {
            return Err(Error::NegativeSqrt(self.lo.to_f64_exact()));
        }
        checked(scalar::sqrt(self.lo, Round::Down), scalar::sqrt(self.hi, Round::Up))
    }

    /// Exact set intersection; `None` when disjoint.
    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Self { lo, hi })
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Smallest interval containing both operands.
    pub fn hull(&self, other: &Self) -> Self {
        Self { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }
}

impl<T: Scalar> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}
