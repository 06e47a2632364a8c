//! Certified expansivity bounds for a parameter interval.
//!
//! [`lambda_bound`] turns a representation graph into a lower bound for the
//! expansion exponent outside `(-delta, delta)`; [`delta_bound`] bisects for
//! a small radius at which that bound is still positive; [`analyze`] runs
//! both and classifies the outcome.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::digraph::{build_representation, min_cycle_mean_lowmem, LowMemOptions};
use crate::error::{Error, Result};
use crate::family::ParamInterval;
use crate::partition::{phase_partition_with, Spacing};
use crate::scalar::{self, Round, Scalar};

pub const DEFAULT_DELTA0: f64 = 0.001;
pub const DEFAULT_BISECTION_STEPS: usize = 20;
pub const DEFAULT_K_COARSE: usize = 1_000;
pub const DEFAULT_K_FINE: usize = 20_000;

/// Outcome of [`lambda_bound`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LambdaBound<T> {
    /// Minimum cycle mean of the representation graph. Only a positive value
    /// certifies expansion.
    Value(T),
    /// The graph has no cycle: every orbit enters the critical neighborhood
    /// within `k` steps.
    Acyclic,
}

impl<T: Scalar> LambdaBound<T> {
    /// True when the bound certifies expansion (vacuously so if acyclic).
    pub fn is_positive(&self) -> bool {
        match *self {
            LambdaBound::Value(v) => v > T::zero(),
            LambdaBound::Acyclic => true,
        }
    }

    pub fn value(&self) -> Option<T> {
        match *self {
            LambdaBound::Value(v) => Some(v),
            LambdaBound::Acyclic => None,
        }
    }
}

/// Lower bound for the expansion exponent of every `f_a`, `a` in `omega`,
/// outside `(-delta, delta)`, using a `k`-cell partition.
pub fn lambda_bound<T: Scalar>(omega: &ParamInterval<T>, delta: T, k: usize) -> Result<LambdaBound<T>> {
    lambda_bound_with(omega, delta, k, Spacing::default(), &LowMemOptions::default())
}

pub fn lambda_bound_with<T: Scalar>(
    omega: &ParamInterval<T>,
    delta: T,
    k: usize,
    spacing: Spacing,
    opts: &LowMemOptions<T>,
) -> Result<LambdaBound<T>> {
    let partition = phase_partition_with(omega, delta, k, spacing)?;
    let graph = build_representation(omega, &partition)?;
    Ok(match min_cycle_mean_lowmem(&graph, opts).value {
        Some(v) => LambdaBound::Value(v),
        None => LambdaBound::Acyclic,
    })
}

/// Settings shared by [`delta_bound`] and [`analyze`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalysisConfig<T> {
    pub delta0: T,
    pub bisection_steps: usize,
    pub k_coarse: usize,
    pub k_fine: usize,
    pub spacing: Spacing,
}

impl<T: Scalar> Default for AnalysisConfig<T> {
    fn default() -> Self {
        Self {
            delta0: T::from_f64(DEFAULT_DELTA0).unwrap(),
            bisection_steps: DEFAULT_BISECTION_STEPS,
            k_coarse: DEFAULT_K_COARSE,
            k_fine: DEFAULT_K_FINE,
            spacing: Spacing::default(),
        }
    }
}

impl<T: Scalar> AnalysisConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta0 > T::zero()) || !self.delta0.is_finite() {
            return Err(Error::InvalidConfig(format!("delta0 must be positive, got {}", self.delta0)));
        }
        for (name, k) in [("k_coarse", self.k_coarse), ("k_fine", self.k_fine)] {
            if k < 2 || k % 2 != 0 {
                return Err(Error::InvalidConfig(format!("{name} must be even and >= 2, got {k}")));
            }
        }
        Ok(())
    }
}

/// Outcome of [`delta_bound`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DeltaBound<T> {
    /// `delta` is the smallest tested radius with a positive coarse bound,
    /// and `coarse` is that bound.
    Certified { delta: T, coarse: LambdaBound<T> },
    /// The coarse bound at `delta0` was not positive.
    NoExpansion { lambda: T },
}

/// Bisects `[0, delta0]` for a small radius whose coarse exponent bound is
/// positive. The upper end of the bracket always holds a radius that has
/// been verified positive; midpoints are rounded upward.
pub fn delta_bound<T: Scalar>(omega: &ParamInterval<T>, cfg: &AnalysisConfig<T>) -> Result<DeltaBound<T>> {
    cfg.validate()?;
    let coarse_at = |delta| lambda_bound_with(omega, delta, cfg.k_coarse, cfg.spacing, &LowMemOptions::default());
    let initial = coarse_at(cfg.delta0)?;
    if let LambdaBound::Value(v) = initial {
        if v <= T::zero() {
            return Ok(DeltaBound::NoExpansion { lambda: v });
        }
    }
    let mut lo = T::zero();
    let mut hi = cfg.delta0;
    let mut coarse = initial;
    for _ in 0..cfg.bisection_steps {
        let mid = scalar::add(lo, hi, Round::Up) / T::two();
        if !(mid > lo && mid < hi) {
            break;
        }
        let bound = coarse_at(mid)?;
        if bound.is_positive() {
            hi = mid;
            coarse = bound;
        } else {
            lo = mid;
        }
    }
    Ok(DeltaBound::Certified { delta: hi, coarse })
}

/// Classification of one analyzed parameter interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Success,
    NoExpansionAtDelta0,
    FinePartitionArtifact,
    Acyclic,
    /// The analysis itself failed (error or panic); not a mathematical
    /// outcome.
    Error,
}

impl Status {
    pub const ALL: [Status; 5] =
        [Status::Success, Status::NoExpansionAtDelta0, Status::FinePartitionArtifact, Status::Acyclic, Status::Error];

    pub fn token(&self) -> &'static str {
        match self {
            Status::Success => "SUCCESS",
            Status::NoExpansionAtDelta0 => "NO_EXPANSION_AT_DELTA0",
            Status::FinePartitionArtifact => "FINE_PARTITION_ARTIFACT",
            Status::Acyclic => "ACYCLIC",
            Status::Error => "ERROR",
        }
    }

    /// Whether the status is a certified result rather than a failure.
    pub fn is_certified(&self) -> bool {
        matches!(self, Status::Success | Status::Acyclic)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Status {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Status::ALL
            .into_iter()
            .find(|st| st.token() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown status {s:?}")))
    }
}

/// Result of analyzing one parameter interval.
///
/// For `Success`, every `f_a` with `a` in `[a_lo, a_hi]` is
/// `lambda_bar`-uniformly expanding outside `(-delta_bar, delta_bar)`.
/// `FinePartitionArtifact` rows keep the non-positive fine bound in
/// `lambda_bar`; `Acyclic` rows have no `lambda_bar`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Analysis<T> {
    pub index: usize,
    pub a_lo: T,
    pub a_hi: T,
    pub status: Status,
    pub delta_bar: Option<T>,
    pub lambda_bar: Option<T>,
    pub k_coarse: usize,
    pub k_fine: usize,
    pub elapsed_millis: u64,
}

impl<T: Scalar> Analysis<T> {
    /// A row recording that the analysis of `omega` could not be carried out.
    pub fn failed(omega: &ParamInterval<T>, cfg: &AnalysisConfig<T>, elapsed_millis: u64) -> Self {
        Self {
            index: omega.index(),
            a_lo: omega.lo(),
            a_hi: omega.hi(),
            status: Status::Error,
            delta_bar: None,
            lambda_bar: None,
            k_coarse: cfg.k_coarse,
            k_fine: cfg.k_fine,
            elapsed_millis,
        }
    }
}

/// Computes `(delta_bar, lambda_bar)` for `omega`: the bisected radius at the
/// coarse resolution, then the exponent bound at the fine resolution.
pub fn analyze<T: Scalar>(omega: &ParamInterval<T>, cfg: &AnalysisConfig<T>) -> Result<Analysis<T>> {
    let start = Instant::now();
    let mut out = Analysis::failed(omega, cfg, 0);
    match delta_bound(omega, cfg)? {
        DeltaBound::NoExpansion { .. } => out.status = Status::NoExpansionAtDelta0,
        DeltaBound::Certified { delta, coarse } => {
            out.delta_bar = Some(delta);
            let fine = match coarse {
                LambdaBound::Acyclic => LambdaBound::Acyclic,
                LambdaBound::Value(_) => {
                    lambda_bound_with(omega, delta, cfg.k_fine, cfg.spacing, &LowMemOptions::default())?
                }
            };
            match fine {
                LambdaBound::Acyclic => out.status = Status::Acyclic,
                LambdaBound::Value(v) => {
                    out.lambda_bar = Some(v);
                    out.status = if v > T::zero() { Status::Success } else { Status::FinePartitionArtifact };
                }
            }
        }
    }
    out.elapsed_millis = start.elapsed().as_millis() as u64;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_tokens_round_trip() {
        for st in Status::ALL {
            assert_eq!(st.token().parse::<Status>().unwrap(), st);
        }
        assert!("success".parse::<Status>().is_err());
        assert!(Status::Acyclic.is_certified());
        assert!(!Status::FinePartitionArtifact.is_certified());
    }

    #[test]
    fn config_validation() {
        let mut cfg = AnalysisConfig::<f64>::default();
        assert_eq!(cfg.delta0, 0.001);
        assert_eq!((cfg.bisection_steps, cfg.k_coarse, cfg.k_fine), (20, 1000, 20000));
        assert!(cfg.validate().is_ok());
        cfg.k_fine = 999;
        assert!(cfg.validate().is_err());
        cfg.k_fine = 1000;
        cfg.delta0 = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn lambda_bound_is_positive_for_coarse_radius_near_two() {
        let w = ParamInterval::new(0, 1.9999, 2.0).unwrap();
        let b = lambda_bound(&w, 0.01, 200).unwrap();
        assert!(b.is_positive(), "{b:?}");
    }

    #[test]
    fn geometric_spacing_misses_expansion_near_two() {
        let w = ParamInterval::new(0, 1.9999, 2.0).unwrap();
        let b = lambda_bound_with(&w, 0.001, 1000, Spacing::Geometric, &LowMemOptions::default()).unwrap();
        assert!(!b.is_positive(), "{b:?}");
        assert!(lambda_bound(&w, 0.001, 1000).unwrap().is_positive());
    }

    #[test]
    fn nested_partitions_are_monotone_in_delta() {
        use crate::digraph::min_cycle_mean_karp;
        use crate::partition::PhasePartition;
        let w = ParamInterval::new(0, 1.95, 1.9501).unwrap();
        let fine = phase_partition_with(&w, 0.002, 300, Spacing::Adapted).unwrap();
        let positive: Vec<f64> = fine.breakpoints().into_iter().filter(|&x| x > 0.0).collect();
        let mut prev = f64::NEG_INFINITY;
        for cut in [0, 10, 40, 90] {
            let part = PhasePartition::from_breakpoints(&positive[cut..]).unwrap();
            let g = build_representation(&w, &part).unwrap();
            let mu = min_cycle_mean_karp(&g).value.unwrap();
            assert!(mu >= prev, "delta {} gave {mu} < {prev}", part.delta());
            prev = mu;
        }
    }

    #[test]
    fn analyze_certifies_interval_near_two() {
        let w = ParamInterval::new(7, 1.9999, 2.0).unwrap();
        let cfg = AnalysisConfig { k_fine: 2000, ..AnalysisConfig::default() };
        let r = analyze(&w, &cfg).unwrap();
        assert_eq!(r.status, Status::Success);
        assert_eq!(r.index, 7);
        let d = r.delta_bar.unwrap();
        assert!(d > 0.0 && d <= 0.001);
        assert!(r.lambda_bar.unwrap() > 0.0);
        // the reported radius itself was verified at the coarse resolution
        assert!(lambda_bound(&w, d, cfg.k_coarse).unwrap().is_positive());
    }

    #[test]
    fn analyze_reports_failure_in_periodic_window() {
        // attracting period-3 orbit staying 0.02 away from the critical point
        let w = ParamInterval::new(0, 1.76, 1.76001).unwrap();
        let r = analyze(&w, &AnalysisConfig { k_fine: 2000, ..AnalysisConfig::default() }).unwrap();
        assert_eq!(r.status, Status::NoExpansionAtDelta0);
        assert_eq!((r.delta_bar, r.lambda_bar), (None, None));
    }

    #[test]
    fn tiny_radius_at_coarse_resolution_fails() {
        let w = ParamInterval::new(0, 1.9999, 2.0).unwrap();
        let b = lambda_bound(&w, 1e-12, 100).unwrap();
        assert!(!b.is_positive(), "{b:?}");
    }

    #[test]
    fn lambda_bound_rejects_bad_partitions() {
        let w = ParamInterval::new(0, 1.9, 2.0).unwrap();
        assert!(lambda_bound(&w, 0.01, 7).is_err());
        assert!(lambda_bound(&w, 3.0, 8).is_err());
    }
}
