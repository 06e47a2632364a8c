//! Floating-point scalar abstraction.
//!
//! Everything numeric in the crate is generic over [`Scalar`], implemented for
//! `f32` and `f64`. Directed rounding is realized without touching the FPU
//! rounding mode: each nearest-rounded result is corrected by one ulp when an
//! error-free transformation shows it landed on the wrong side of the exact
//! value.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// A binary IEEE 754 floating-point type usable as a rigorous scalar.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Number of explicit mantissa bits.
    const MANTISSA_BITS: u32;

    fn next_up(self) -> Self;
    fn next_down(self) -> Self;

    /// Formats the value as a C99-style hex float, e.g. `0x1.8p+1`.
    fn to_hex(self) -> String;

    /// Parses a decimal or hex-float literal, rounding to nearest.
    fn parse_literal(s: &str) -> Option<Self>;

    /// Exact conversion to `f64` (lossless for both implementors).
    fn to_f64_exact(self) -> f64;

    /// Value from a small integer. Panics if not representable.
    fn from_usize_exact(n: usize) -> Self {
        let v = Self::from_usize(n).expect("integer out of range");
        assert!(v.to_usize() == Some(n), "integer {n} not exactly representable");
        v
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn half() -> Self {
        Self::one() / Self::two()
    }
}

macro_rules! impl_scalar {
    ($t:ty, $bits:ty, $mant:expr, $parse_hex:path) => {
        impl Scalar for $t {
            const MANTISSA_BITS: u32 = $mant;

            #[inline]
            fn next_up(self) -> Self {
                <$t>::next_up(self)
            }

            #[inline]
            fn next_down(self) -> Self {
                <$t>::next_down(self)
            }

            fn to_hex(self) -> String {
                const EXP_BITS: u32 = <$bits>::BITS - 1 - $mant;
                const BIAS: i64 = (1 << (EXP_BITS - 1)) - 1;
                if self.is_nan() {
                    return "nan".to_string();
                }
                let sign = if self.is_sign_negative() { "-" } else { "" };
                if self.is_infinite() {
                    return format!("{sign}inf");
                }
                let bits = self.to_bits();
                let biased = ((bits >> $mant) & ((1 << EXP_BITS) - 1)) as i64;
                let frac = bits & ((1 << $mant) - 1);
                if biased == 0 && frac == 0 {
                    return format!("{sign}0x0p+0");
                }
                let (lead, exp) = if biased == 0 { (0, 1 - BIAS) } else { (1, biased - BIAS) };
                // left-align the fraction on a nibble boundary
                let nibbles = ($mant + 3) / 4;
                let aligned = (frac as u64) << (nibbles * 4 - $mant);
                let mut digits = format!("{:0width$x}", aligned, width = nibbles as usize);
                while digits.ends_with('0') {
                    digits.pop();
                }
                let dot = if digits.is_empty() { "" } else { "." };
                format!("{sign}0x{lead}{dot}{digits}p{exp:+}")
            }

            fn parse_literal(s: &str) -> Option<Self> {
                let s = s.trim();
                let body = s.strip_prefix(['-', '+']).unwrap_or(s);
                if body.starts_with("0x") || body.starts_with("0X") {
                    $parse_hex(s, false).ok()
                } else {
                    s.parse::<$t>().ok().filter(|v| v.is_finite())
                }
            }

            #[inline]
            fn to_f64_exact(self) -> f64 {
                self as f64
            }
        }
    };
}

impl_scalar!(f64, u64, 52, hexf_parse::parse_hexf64);
impl_scalar!(f32, u32, 23, hexf_parse::parse_hexf32);

/// Rounding direction for the correctly-directed elementary operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
}

#[inline]
fn adjust<T: Scalar>(approx: T, err_sign: T, dir: Round) -> T {
    // err_sign carries the sign of (exact - approx)
    match dir {
        Round::Down if err_sign < T::zero() => approx.next_down(),
        Round::Up if err_sign > T::zero() => approx.next_up(),
        _ => approx,
    }
}

/// `a + b` rounded in direction `dir`.
#[inline]
pub fn add<T: Scalar>(a: T, b: T, dir: Round) -> T {
    let s = a + b;
    if !s.is_finite() {
        return s;
    }
    // TwoSum: err is exactly (a + b) - s
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    adjust(s, err, dir)
}

#[inline]
pub fn sub<T: Scalar>(a: T, b: T, dir: Round) -> T {
    add(a, -b, dir)
}

/// Below this magnitude the FMA residual is no longer exact.
#[inline]
fn tiny<T: Scalar>() -> T {
    T::min_positive_value() / T::epsilon()
}

#[inline]
fn step<T: Scalar>(v: T, dir: Round) -> T {
    match dir {
        Round::Down => v.next_down(),
        Round::Up => v.next_up(),
    }
}

/// `a * b` rounded in direction `dir`.
#[inline]
pub fn mul<T: Scalar>(a: T, b: T, dir: Round) -> T {
    let p = a * b;
    if !p.is_finite() || a == T::zero() || b == T::zero() {
        return p;
    }
    if p.abs() < tiny() {
        return step(p, dir);
    }
    let err = a.mul_add(b, -p);
    adjust(p, err, dir)
}

/// `a / b` rounded in direction `dir`. `b` must be nonzero.
#[inline]
pub fn div<T: Scalar>(a: T, b: T, dir: Round) -> T {
    let q = a / b;
    if !q.is_finite() || a == T::zero() {
        return q;
    }
    if q.abs() < tiny() {
        return step(q, dir);
    }
    // remainder a - q*b is exact; exact quotient - q has the sign of r/b
    let r = (-q).mul_add(b, a);
    let sign = if b < T::zero() { -r } else { r };
    adjust(q, sign, dir)
}

/// `sqrt(a)` rounded in direction `dir`, for `a >= 0`.
#[inline]
pub fn sqrt<T: Scalar>(a: T, dir: Round) -> T {
    let r = a.sqrt();
    if r == T::zero() || !r.is_finite() {
        return r;
    }
    // sign of (a - r*r) equals the sign of (sqrt(a) - r)
    let residual = (-r).mul_add(r, a);
    adjust(r, residual, dir)
}
