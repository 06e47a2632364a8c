//! Enclosures for the quadratic family `f_a(x) = a - x^2`, uniform over a
//! parameter interval.

use std::fmt;

use crate::error::{Error, Result};
use crate::rigor::{log_lo, Interval};
use crate::scalar::Scalar;

/// A parameter interval `[a_lo, a_hi]` with `0 < a_lo <= a_hi <= 2`, tagged
/// with its position in a parameter grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamInterval<T> {
    index: usize,
    range: Interval<T>,
}

impl<T: Scalar> ParamInterval<T> {
    pub fn new(index: usize, lo: T, hi: T) -> Result<Self> {
        let err = || Error::InvalidParameters { lo: lo.to_f64_exact(), hi: hi.to_f64_exact() };
        if !(lo > T::zero() && lo <= hi && hi <= T::two()) {
            return Err(err());
        }
        Ok(Self { index, range: Interval::new(lo, hi).map_err(|_| err())? })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn lo(&self) -> T {
        self.range.lo()
    }

    pub fn hi(&self) -> T {
        self.range.hi()
    }

    pub fn as_interval(&self) -> Interval<T> {
        self.range
    }

    /// Round-to-nearest midpoint.
    pub fn midpoint(&self) -> T {
        let (lo, hi) = (self.lo(), self.hi());
        lo + (hi - lo) / T::two()
    }

    pub fn fixed_point_neg(&self) -> Result<Interval<T>> {
        fixed_point_neg(&self.range)
    }

    pub fn phase_domain(&self) -> Result<PhaseDomain<T>> {
        let p = self.fixed_point_neg()?;
        let lo = p.lo();
        Ok(PhaseDomain { domain: Interval::new(lo, -lo)? })
    }

    /// Encloses `{a - x^2 : a in self, x in x}`.
    pub fn image(&self, x: &Interval<T>) -> Result<Interval<T>> {
        self.range.sub(&x.square()?)
    }

    /// Encloses every `x` with `f_a(x) in y` for some `a` in the interval,
    /// split into the negative and positive square-root branches.
    pub fn preimage(&self, y: &Interval<T>) -> Result<Preimage<T>> {
        let radicand = self.range.sub(y)?;
        if radicand.hi() < T::zero() {
            return Ok(Preimage { negative: None, positive: None });
        }
        let root = Interval::new(radicand.lo().max(T::zero()), radicand.hi())?.sqrt()?;
        Ok(Preimage { negative: Some(root.neg()), positive: Some(root) })
    }
}

impl<T: Scalar> fmt::Display for ParamInterval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "omega[{}] = {}", self.index, self.range)
    }
}

/// Encloses the negative fixed point `p_a = -1/2 - sqrt(1 + 4a)/2` over the
/// parameter range `a`, which must lie in `(-1/4, inf)`.
pub fn fixed_point_neg<T: Scalar>(a: &Interval<T>) -> Result<Interval<T>> {
    let quarter = T::half() * T::half();
    if !(a.lo() > -quarter) {
        return Err(Error::InvalidParameters { lo: a.lo().to_f64_exact(), hi: a.hi().to_f64_exact() });
    }
    let four = T::two() + T::two();
    let disc = Interval::point(T::one()).add(&a.scale_pow2(four)?)?;
    let half_root = disc.sqrt()?.scale_pow2(T::half())?;
    Interval::point(-T::half()).sub(&half_root)
}

/// The phase interval `I_omega`, the union of `I_a = [p_a, -p_a]` over the
/// parameter interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseDomain<T> {
    domain: Interval<T>,
}

impl<T: Scalar> PhaseDomain<T> {
    pub fn interval(&self) -> Interval<T> {
        self.domain
    }

    /// Right endpoint `-lo(p)`.
    pub fn radius(&self) -> T {
        self.domain.hi()
    }
}

/// Result of [`ParamInterval::preimage`]. A branch is `None` only when no
/// parameter admits a real preimage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Preimage<T> {
    pub negative: Option<Interval<T>>,
    pub positive: Option<Interval<T>>,
}

impl<T: Scalar> Preimage<T> {
    pub fn branches(&self) -> impl Iterator<Item = Interval<T>> + '_ {
        self.negative.iter().chain(self.positive.iter()).copied()
    }
}

/// A lower bound for `inf { log|f'(x)| : x in x } = log(2 min|x|)`.
pub fn deriv_log_inf<T: Scalar>(x: &Interval<T>) -> Result<T> {
    if x.contains_zero() {
        return Err(Error::ContainsCritical { lo: x.lo().to_f64_exact(), hi: x.hi().to_f64_exact() });
    }
    // doubling is exact
    log_lo(x.mig() * T::two())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval<f64> {
        Interval::new(lo, hi).unwrap()
    }

    fn omega(lo: f64, hi: f64) -> ParamInterval<f64> {
        ParamInterval::new(0, lo, hi).unwrap()
    }

    #[test]
    fn parameter_range_validation() {
        assert!(ParamInterval::new(0, 0.0, 1.0).is_err());
        assert!(ParamInterval::new(0, 1.5, 1.4).is_err());
        assert!(ParamInterval::new(0, 1.5, 2.0f64.next_up()).is_err());
        assert!(ParamInterval::new(3, 1.4, 2.0).is_ok());
    }

    #[test]
    fn fixed_point_examples() {
        let p = omega(2.0, 2.0).fixed_point_neg().unwrap();
        assert!(p.contains(-2.0));
        assert!(p.width() <= 4.0 * f64::EPSILON * 2.0);
        let p0 = fixed_point_neg(&iv(0.0, 0.0)).unwrap();
        assert!(p0.contains(-1.0));
        assert!(fixed_point_neg(&iv(-0.3, 0.0)).is_err());
    }

    #[test]
    fn phase_domain_is_symmetric() {
        let d = omega(2.0, 2.0).phase_domain().unwrap().interval();
        assert!(d.lo() <= -2.0 && d.hi() >= 2.0);
        assert_eq!(d.lo(), -d.hi());
        let d = omega(1.4, 1.4).phase_domain().unwrap();
        let p = 0.5 + 6.6f64.sqrt() / 2.0;
        assert!(d.radius() >= p - 1e-15 && d.radius() < p + 1e-14);
    }

    #[test]
    fn image_examples() {
        let w = omega(2.0, 2.0);
        assert!(w.image(&iv(1.0, 1.0)).unwrap().contains(1.0));
        assert!(w.image(&iv(0.0, 0.0)).unwrap().contains(2.0));
        let x = iv(0.3, 0.7);
        assert_eq!(w.image(&x).unwrap(), w.image(&x.neg()).unwrap());
    }

    #[test]
    fn derivative_bounds() {
        let v = deriv_log_inf(&iv(0.5, 0.6)).unwrap();
        assert!(v <= 0.0 && v > -1e-300);
        let l2 = deriv_log_inf(&iv(1.0, 2.0)).unwrap();
        assert!(l2 <= std::f64::consts::LN_2 && l2 > std::f64::consts::LN_2 - 1e-15);
        assert_eq!(deriv_log_inf(&iv(-0.6, -0.5)).unwrap(), v);
        assert!(deriv_log_inf(&iv(-0.1, 0.2)).is_err());
        assert!(deriv_log_inf(&iv(0.0, 0.2)).is_err());
    }

    #[test]
    fn preimage_examples() {
        let w = omega(2.0, 2.0);
        let pre = w.preimage(&iv(2.0, 2.0)).unwrap();
        assert!(pre.negative.unwrap().contains(0.0) && pre.positive.unwrap().contains(0.0));
        let pre = w.preimage(&iv(1.0, 1.0)).unwrap();
        assert!(pre.negative.unwrap().contains(-1.0) && pre.positive.unwrap().contains(1.0));
        let pre = w.preimage(&iv(2.5, 3.0)).unwrap();
        assert_eq!(pre.branches().count(), 0);
    }

    #[test]
    fn preimage_of_image_covers() {
        let w = omega(1.9, 1.95);
        for &(lo, hi) in &[(0.1, 0.2), (-1.3, -1.1), (1.5, 1.9)] {
            let x = iv(lo, hi);
            let pre = w.preimage(&w.image(&x).unwrap()).unwrap();
            assert!(pre.branches().any(|b| b.contains_interval(&x)));
        }
    }
}
