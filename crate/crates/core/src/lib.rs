//! Reed–Muller codes on the binary erasure channel.
//!
//! Builds RM(n, r) and general binary linear codes, decodes them bit by bit
//! under MAP over the BEC, and measures EXIT functions exactly (small
//! blocklengths) or by Monte Carlo. Around that sit the checks that explain
//! why RM codes reach capacity: the Area Theorem, invariance under the affine
//! group, monotone failure sets, and the shrinking width of the transition.

pub mod channel;
pub mod codes;
pub mod error;
pub mod exit;
pub mod gf2;
pub mod math;
pub mod scalar;
pub mod symmetry;
pub mod threshold;

pub use channel::{bit_map_decode, block_map_decode, monotonicity_check, omega_membership, sample_erasures, DecodeReport, ErasurePattern};
pub use codes::{rm_generator, LinearCode, RmParams};
pub use error::{Error, Result};
pub use exit::{ExitPolynomial, Focus};
pub use gf2::{BitMatrix, BitVector};
pub use scalar::Scalar;
pub use threshold::{capacity_gap_bound, fk_width_bound, BoundParams};

/// Exact rational numbers used for rates and areas.
pub type Rational = num_rational::BigRational;

/// Monte Carlo EXIT curve in double precision.
pub type ExitCurveF64 = exit::ExitCurve<f64>;
/// Monte Carlo EXIT curve in single precision.
pub type ExitCurveF32 = exit::ExitCurve<f32>;

/// Threshold report in double precision.
pub type ThresholdReportF64 = threshold::ThresholdReport<f64>;
/// Threshold report in single precision.
pub type ThresholdReportF32 = threshold::ThresholdReport<f32>;
