//! Certified lower bounds for the expansion of the quadratic family
//! `f_a(x) = a - x^2` outside a small neighborhood of the critical point,
//! valid uniformly over a parameter interval.
//!
//! The computation is generic over the floating-point type; the aliases
//! below fix it to `f64`.

// `!(a < b)` comparisons are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod digraph;
pub mod error;
pub mod expansivity;
pub mod family;
pub mod partition;
pub mod rigor;
pub mod scalar;
pub mod sweep;

pub use error::{Error, Result};
pub use expansivity::{analyze, delta_bound, lambda_bound, AnalysisConfig, LambdaBound, Status};
pub use scalar::{Round, Scalar};

pub type Enclosure = rigor::Interval<f64>;
pub type Enclosure32 = rigor::Interval<f32>;
pub type ParamInterval = family::ParamInterval<f64>;
pub type PhasePartition = partition::PhasePartition<f64>;
pub type ParamGrid = partition::ParamGrid<f64>;
pub type WeightedDigraph = digraph::Digraph<f64>;
pub type AnalysisResult = expansivity::Analysis<f64>;
pub type SweepConfig = sweep::SweepConfig<f64>;
