//! Extended-precision reference arithmetic shared by the integration tests.
#![allow(dead_code)]

use dashu_float::round::mode::Down;
use dashu_float::FBig;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

pub type Q = BigRational;

/// Exact value of a finite double.
pub fn q(x: f64) -> Q {
    BigRational::from_float(x).expect("finite")
}

/// Exact value of a decimal literal such as "1.765".
pub fn q_dec(s: &str) -> Q {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let digits: BigInt = format!("{int}{frac}").parse().unwrap();
    let scale = BigInt::from(10).pow(frac.len() as u32);
    BigRational::new(digits, scale)
}

pub fn contains(lo: f64, hi: f64, v: &Q) -> bool {
    q(lo) <= *v && *v <= q(hi)
}

/// True when `sqrt(v)` lies in `[lo, hi]` with `0 <= lo`.
pub fn contains_sqrt(lo: f64, hi: f64, v: &Q) -> bool {
    let (l, h) = (q(lo), q(hi));
    !l.is_negative() && &l * &l <= *v && *v <= &h * &h
}

type Big = FBig<Down, 2>;

const BITS: usize = 256;

/// `ln(x)` for `x > 0` at 256 bits, rounded toward minus infinity.
pub fn ln_down(x: f64) -> Big {
    let b: Big = Big::try_from(x).unwrap().with_precision(BITS).value();
    b.ln()
}

pub fn big(x: f64) -> Big {
    Big::try_from(x).unwrap().with_precision(BITS).value()
}

/// True when `w <= ln(x)` holds for the real logarithm. Clear cases are
/// decided in double precision, whose `ln` is accurate to well under the
/// margin used; the rest at 256 bits.
pub fn below_ln(w: f64, x: f64) -> bool {
    let l = x.ln();
    let margin = 1e-12 * l.abs().max(1e-300) + 1e-300;
    if w < l - margin {
        return true;
    }
    if w > l + margin {
        return false;
    }
    big(w) <= ln_down(x)
}

/// Sum of `ln|2 x_i|` at 256 bits, each term rounded down.
pub fn sum_ln_abs2(xs: &[f64]) -> Big {
    xs.iter().fold(big(0.0), |s, &x| s + ln_down(2.0 * x.abs()))
}

pub fn is_zero(v: &Q) -> bool {
    v.is_zero()
}
