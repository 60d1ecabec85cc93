//! Achievable-rate analysis for two-user interference networks operated with
//! point-to-point codes.
//!
//! The crate is organised bottom-up:
//!
//! - [`channel`]: Gaussian and discrete memoryless channel models and the
//!   twelve information quantities ([`RatePrimitives`]) every other module
//!   consumes.
//! - [`region`]: the achievable region as an explicit union of four convex
//!   pieces, one per receiver decoding configuration.
//! - [`sum_rate`]: per-assignment sum rates, the closed-form regime
//!   classifiers for the traditional and generalized message assignments,
//!   and exhaustive oracles that certify them.
//! - [`protocol`]: message-passing simulation of the rate-determination
//!   procedures for one legacy and one advanced receiver, with an audit
//!   against centralized computation.
//! - [`ensemble`]: seeded random channel generators used by property checks.
//!
//! All rates are in bits per channel use.

pub mod channel;
pub mod ensemble;
mod error;
pub mod format;
pub mod protocol;
pub mod region;
pub mod sum_rate;

pub use channel::{Channel, DmcIcChannel, GaussianIcChannel, RatePrimitives, Violation};
pub use error::{Error, Result};
pub use region::{DecodeConfig, Decoding, RegionPolygon};
pub use sum_rate::{Assignment, BoundaryTie, Classification, Regime, SumRateResult};

/// Absolute slack used for membership tests and for detecting ties at the
/// regime boundaries.
pub const TOLERANCE: f64 = 1e-9;
