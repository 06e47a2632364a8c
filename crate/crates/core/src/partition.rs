//! Parameter grids and phase-space partitions.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::family::ParamInterval;
use crate::rigor::Interval;
use crate::scalar::Scalar;

/// Subdivision points `theta_0 <= ... <= theta_N` of a parameter range.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamGrid<T> {
    points: Vec<T>,
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The `i`-th subdivision point of `[a_min, a_max]` into `n` pieces.
///
/// The fraction `i/n` is reduced before evaluation and every operation is
/// rounded to nearest, so a grid and any refinement of it agree bit-for-bit
/// on their common points.
pub fn grid_point<T: Scalar>(a_min: T, a_max: T, n: usize, i: usize) -> T {
    assert!(i <= n, "grid index {i} out of range for N = {n}");
    let g = gcd(i, n);
    let num = T::from_usize_exact(i / g);
    let den = T::from_usize_exact(n / g);
    a_min + (num * (a_max - a_min)) / den
}

/// Subdivides `[a_min, a_max]` into `n` adjacent intervals.
pub fn subdivide_parameters<T: Scalar>(a_min: T, a_max: T, n: usize) -> Result<ParamGrid<T>> {
    if n == 0 {
        return Err(Error::InvalidConfig("grid size N must be positive".into()));
    }
    if !(a_min < a_max) || !a_min.is_finite() || !a_max.is_finite() {
        return Err(Error::InvalidConfig(format!("empty parameter range [{a_min}, {a_max}]")));
    }
    let mut points: Vec<T> = (0..=n).map(|i| grid_point(a_min, a_max, n, i)).collect();
    // the reduced formula hits a_max exactly for the usual endpoints; make it
    // unconditional
    points[n] = a_max;
    if points.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidConfig(format!("grid of [{a_min}, {a_max}] with N = {n} is not monotone")));
    }
    Ok(ParamGrid { points })
}

impl<T: Scalar> ParamGrid<T> {
    /// Number of intervals.
    pub fn len(&self) -> usize {
        self.points.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    /// `omega_i = [theta_i, theta_{i+1}]`.
    pub fn interval(&self, i: usize) -> Result<ParamInterval<T>> {
        if i >= self.len() {
            return Err(Error::InvalidConfig(format!("interval index {i} out of range 0..{}", self.len())));
        }
        ParamInterval::new(i, self.points[i], self.points[i + 1])
    }
}

/// Cells covering `I_omega \ (-delta, delta)` together with the critical
/// cell `[-delta, delta]`.
///
/// Cells are sorted ascending, adjacent cells share an endpoint, and the
/// negative half is the exact mirror image of the positive half.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePartition<T> {
    delta: T,
    cells: Vec<Interval<T>>,
    critical: Interval<T>,
}

/// How breakpoints are distributed on `[delta, p]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Spacing {
    /// `delta * (p/delta)^(j/m)`: constant relative cell width.
    Geometric,
    /// Half the cells geometric, half clustered around the first
    /// [`ORBIT_POINTS`] iterates of the critical point.
    #[default]
    Adapted,
}

impl Spacing {
    pub fn token(&self) -> &'static str {
        match self {
            Spacing::Geometric => "geometric",
            Spacing::Adapted => "adapted",
        }
    }
}

impl std::str::FromStr for Spacing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geometric" => Ok(Spacing::Geometric),
            "adapted" => Ok(Spacing::Adapted),
            _ => Err(Error::InvalidConfig(format!("unknown spacing {s:?}"))),
        }
    }
}

/// Number of post-critical iterates refined by [`Spacing::Adapted`].
pub const ORBIT_POINTS: usize = 6;

/// Refinement scale at the critical value, in units of the width of the image
/// of the critical cell.
pub const ORBIT_SCALE: usize = 10;

fn check_increasing<T: Scalar>(points: &[T], delta: T, p: T, m: usize) -> Result<()> {
    if points.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidPartition(format!(
            "cannot fit {m} cells between {delta} and {p} at this precision"
        )));
    }
    Ok(())
}

/// Geometric breakpoints `delta * (p/delta)^(j/m)` for `j = 0..=m`, with the
/// endpoints pinned to `delta` and `p`.
fn geometric_breakpoints<T: Scalar>(delta: T, p: T, m: usize) -> Result<Vec<T>> {
    let log_ratio = (p / delta).ln();
    let steps = T::from_usize_exact(m);
    let mut points = Vec::with_capacity(m + 1);
    points.push(delta);
    for j in 1..m {
        let t = T::from_usize_exact(j) / steps;
        let x = delta * (t * log_ratio).exp();
        let prev = *points.last().unwrap();
        points.push(x.max(prev.next_up()));
    }
    points.push(p);
    check_increasing(&points, delta, p, m)?;
    Ok(points)
}

/// Cumulative cell density of [`Spacing::Adapted`] on `[delta, p]`,
/// normalized to run from 0 to 1.
///
/// The density is `1/x` plus, for each center `c` with scale `eta`,
/// `1/(|x - c| + eta)`, with the two parts given equal mass.
struct AdaptedDensity<T> {
    delta: T,
    log_ratio: T,
    centers: Vec<(T, T, T, T)>,
}

impl<T: Scalar> AdaptedDensity<T> {
    fn new(omega: &ParamInterval<T>, delta: T, p: T) -> Self {
        let a = omega.midpoint();
        let floor = p * T::epsilon() * T::from_usize_exact(16);
        // width of f(critical cell), widened so the refinement is not too sharp
        let image_width = (omega.hi() - omega.lo()).max(delta * delta).max(floor);
        let mut eta = image_width * T::from_usize_exact(ORBIT_SCALE);
        let mut x = T::zero();
        let mut centers = Vec::with_capacity(ORBIT_POINTS);
        for _ in 0..ORBIT_POINTS {
            x = a - x * x;
            let c = x.abs().min(p);
            let e = eta.min(p);
            let (g0, g1) = (Self::antiderivative(delta, c, e), Self::antiderivative(p, c, e));
            centers.push((c, e, g0, g1 - g0));
            // a small neighborhood of c grows like the derivative along the orbit
            eta = eta * (T::two() * x.abs()).max(T::one());
        }
        Self { delta, log_ratio: (p / delta).ln(), centers }
    }

    fn antiderivative(t: T, c: T, eta: T) -> T {
        let d = t - c;
        let g = (d.abs() + eta).ln() - eta.ln();
        if d < T::zero() {
            -g
        } else {
            g
        }
    }

    fn mass(&self, x: T) -> T {
        let geometric = (x / self.delta).ln() / self.log_ratio;
        let share = T::one() / T::from_usize_exact(self.centers.len());
        let orbit = self
            .centers
            .iter()
            .map(|&(c, eta, g0, total)| (Self::antiderivative(x, c, eta) - g0) / total)
            .fold(T::zero(), |s, v| s + v)
            * share;
        (geometric + orbit) * T::half()
    }
}

/// Breakpoints at equal steps of [`AdaptedDensity`], found by bisection.
fn adapted_breakpoints<T: Scalar>(omega: &ParamInterval<T>, delta: T, p: T, m: usize) -> Result<Vec<T>> {
    let density = AdaptedDensity::new(omega, delta, p);
    let steps = T::from_usize_exact(m);
    let mut points = Vec::with_capacity(m + 1);
    points.push(delta);
    for j in 1..m {
        let target = T::from_usize_exact(j) / steps;
        let prev = *points.last().unwrap();
        let (mut lo, mut hi) = (prev, p);
        loop {
            let mid = lo + (hi - lo) * T::half();
            if !(mid > lo && mid < hi) {
                break;
            }
            if density.mass(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        points.push(hi.max(prev.next_up()));
    }
    points.push(p);
    check_increasing(&points, delta, p, m)?;
    Ok(points)
}

/// Partitions the complement of `(-delta, delta)` in the phase interval of
/// `omega` into `k` cells, `k/2` per side, with [`Spacing::Adapted`].
pub fn phase_partition<T: Scalar>(omega: &ParamInterval<T>, delta: T, k: usize) -> Result<PhasePartition<T>> {
    phase_partition_with(omega, delta, k, Spacing::Adapted)
}

/// [`phase_partition`] with an explicit breakpoint distribution.
///
/// Geometric spacing keeps the oscillation of `log|2x|` the same on every
/// cell. Adapted spacing additionally resolves the post-critical orbit, which
/// the cycles through the critical cell follow; without it those cycles lose
/// the expansion accumulated near the critical value.
pub fn phase_partition_with<T: Scalar>(
    omega: &ParamInterval<T>,
    delta: T,
    k: usize,
    spacing: Spacing,
) -> Result<PhasePartition<T>> {
    if k < 2 || !k.is_multiple_of(2) {
        return Err(Error::InvalidPartition(format!("cell count must be even and >= 2, got {k}")));
    }
    if !(delta > T::zero()) || !delta.is_finite() {
        return Err(Error::InvalidPartition(format!("radius must be positive, got {delta}")));
    }
    let p = omega.phase_domain()?.radius();
    if delta >= p {
        return Err(Error::InvalidPartition(format!("radius {delta} not below domain bound {p}")));
    }
    let positive = match spacing {
        Spacing::Geometric => geometric_breakpoints(delta, p, k / 2)?,
        Spacing::Adapted => adapted_breakpoints(omega, delta, p, k / 2)?,
    };
    PhasePartition::from_breakpoints(&positive)
}

impl<T: Scalar> PhasePartition<T> {
    /// Builds a symmetric partition from its positive breakpoints
    /// `delta = b_0 < b_1 < ... < b_m`.
    pub fn from_breakpoints(positive: &[T]) -> Result<Self> {
        if positive.len() < 2 || !(positive[0] > T::zero()) {
            return Err(Error::InvalidPartition("need at least two positive breakpoints".into()));
        }
        if positive.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidPartition("breakpoints must be strictly increasing".into()));
        }
        let m = positive.len() - 1;
        let mut cells = Vec::with_capacity(2 * m);
        for j in (0..m).rev() {
            cells.push(Interval::new(-positive[j + 1], -positive[j])?);
        }
        for j in 0..m {
            cells.push(Interval::new(positive[j], positive[j + 1])?);
        }
        let delta = positive[0];
        Ok(Self { delta, cells, critical: Interval::new(-delta, delta)? })
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn cells(&self) -> &[Interval<T>] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn critical(&self) -> Interval<T> {
        self.critical
    }

    /// Indices of all cells meeting `y`, as a contiguous range.
    pub fn cells_meeting(&self, y: &Interval<T>) -> Range<usize> {
        let first = self.cells.partition_point(|c| c.hi() < y.lo());
        let last = self.cells.partition_point(|c| c.lo() <= y.hi());
        first..last.max(first)
    }

    /// Index of some cell containing `x`, if any.
    pub fn locate(&self, x: T) -> Option<usize> {
        let i = self.cells.partition_point(|c| c.hi() < x);
        (i < self.cells.len() && self.cells[i].contains(x)).then_some(i)
    }

    /// All distinct cell endpoints in ascending order.
    pub fn breakpoints(&self) -> Vec<T> {
        let mut out: Vec<T> = Vec::with_capacity(self.cells.len() + 2);
        for c in &self.cells {
            if out.last() != Some(&c.lo()) {
                out.push(c.lo());
            }
            out.push(c.hi());
        }
        out
    }
}
