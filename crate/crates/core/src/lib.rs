//! Discrete bit-loading and power allocation for multicarrier (OFDMA) links.
//!
//! The crate is organised around a small pipeline:
//!
//! - [`channel`] draws multipath tap sets, evaluates their frequency response
//!   and turns them into per-subcarrier normalized gains.
//! - [`alloc`] holds the allocator family: equal power, water-filling, the
//!   Hughes-Hartogs greedy loader and its warm-start and batch variants.
//! - [`grouping`] forms contiguous subcarrier groups by a dB threshold and
//!   runs the greedy loader over groups.
//! - [`metrics`] aggregates capacities, iteration counts and the
//!   capacity/complexity tradeoff factor.
//! - [`harness`] drives seeded Monte Carlo experiments and writes results.
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`). The harness
//! works in `f64`; the aliases below name the concrete types it uses.

// `!(x > 0)` style checks are how NaN gets rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alloc;
pub mod channel;
mod error;
pub mod grouping;
pub mod harness;
pub mod metrics;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

/// Gain vector in double precision.
pub type GainVector64 = alloc::GainVector<f64>;
/// Allocation result in double precision.
pub type AllocationResult64 = alloc::AllocationResult<f64>;
/// Tap set in double precision.
pub type TapSet64 = channel::TapSet<f64>;
/// Channel realization in double precision.
pub type ChannelRealization64 = channel::ChannelRealization<f64>;
/// System parameters in double precision.
pub type SystemParams64 = channel::SystemParams<f64>;
/// Group partition in double precision.
pub type GroupPartition64 = grouping::GroupPartition<f64>;

/// Gain vector in single precision.
pub type GainVector32 = alloc::GainVector<f32>;
/// Allocation result in single precision.
pub type AllocationResult32 = alloc::AllocationResult<f32>;
