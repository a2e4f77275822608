//! Local minimax risk over Wasserstein balls.
//!
//! The crate computes worst-case expected losses over `W_p` balls around
//! finitely supported distributions, both directly (a transport LP over a
//! finite candidate set) and through the one-dimensional dual in `lambda`.
//! On top of that sit minimax ERM over finite hypothesis grids, calculators
//! for the generalization bounds, a closed-form two-hypothesis casebook and a
//! transport-based domain adaptation pipeline.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod adaptation;
pub mod ball;
pub mod bounds;
pub mod casebook;
pub mod classes;
pub mod cli;
pub mod dataset;
pub mod dual;
pub mod erm;
pub mod error;
pub mod hypothesis;
pub mod lp;
pub mod network_simplex;
pub mod rng;
pub mod space;
pub mod transport;
pub mod verify;

pub use ball::AmbiguityBall;
pub use error::{Error, Result};
pub use hypothesis::Hypothesis;
pub use space::{EmpiricalDistribution, InstanceSpace, MetricKind, Point};
