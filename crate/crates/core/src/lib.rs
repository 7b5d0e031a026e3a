//! Dimensions of self-affine sets with cylinder holes.
//!
//! The crate computes pressures and reduced pressures of affine iterated
//! function systems, the dimensions of the survivor sets left after
//! removing a cylinder, escape rates of Bernoulli measures into such holes,
//! and scans comparing these quantities with their limits as the hole
//! shrinks to a point.
//!
//! Diagonal systems are handled exactly: every permutation potential is
//! multiplicative, so pressures collapse to logarithms of finite sums and
//! reduced pressures to log Perron roots of a transfer operator over the
//! states of a pattern-avoidance automaton.

pub mod asymptotics;
pub mod avoidance;
pub mod error;
pub mod linalg;
pub mod measures;
pub mod potential;
pub mod pressure;
pub mod symbolic;

pub use asymptotics::{
    deficit_scan, derivative_relation_check, fp_ratio_scan, maximizing_frequency, z_constant,
    DeficitReport, DerivativeReport, FpRatioTable, FrequencyVector, LeftDerivative, ZConstant,
};
pub use avoidance::{AvoidanceAutomaton, TransferOperator};
pub use error::{Error, Result};
pub use linalg::{Matrix, NonnegativeOperator, PerronEstimate, PerronOptions};
pub use measures::{kaenmaki_measure, mu_d, pressure_gap_identity, BernoulliMeasure, GapIdentity};
pub use potential::{AffineIFS, Permutation};
pub use pressure::{
    full_dimension, survivor_dimension, FullDimension, PressureFunction, PressureKind, Root,
    SurvivorDimension, Tolerances,
};
pub use symbolic::{HoleSpec, Word};
