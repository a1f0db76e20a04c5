//! Power and bit allocators for one user's set of subchannels.
//!
//! Every allocator maximizes `Σ log₂(1 + pᵢ·δᵢ/Γ)` subject to `Σ pᵢ ≤ P_max`.
//! [`equal_power`] and [`waterfill`] are continuous; [`hh_allocate`] loads
//! integer bits greedily by incremental energy cost and covers the plain,
//! warm-started and κ-batch variants.

mod gap;
mod greedy;
mod ledger;
mod waterfill;

use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

pub use gap::snr_gap_from_ber;
pub(crate) use greedy::greedy_fill;
pub use greedy::{hh_allocate, hh_wf_allocate};
pub use ledger::{ledger_predicted, OpLedger, PredictedLedger};
pub use waterfill::{equal_power, waterfill, wf_initial_bits};

/// Normalized gains of one user's subchannels with the link constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainVector<T> {
    gains: Vec<T>,
    snr_gap: T,
    power_budget: T,
    /// `Γ/δᵢ`, the power needed for the first bit on each subchannel.
    inverse: Vec<T>,
}

impl<T: Real> GainVector<T> {
    pub fn new(gains: Vec<T>, snr_gap: T, power_budget: T) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::invalid("gain vector is empty"));
        }
        if let Some(i) = gains
            .iter()
            .position(|g| !(*g > T::zero()) || !g.is_finite())
        {
            return Err(Error::invalid(format!(
                "gain {i} must be positive and finite, got {}",
                gains[i]
            )));
        }
        if !(snr_gap >= T::one()) || !snr_gap.is_finite() {
            return Err(Error::invalid(format!(
                "SNR gap must be >= 1, got {snr_gap}"
            )));
        }
        if !(power_budget > T::zero()) || !power_budget.is_finite() {
            return Err(Error::invalid(format!(
                "power budget must be positive, got {power_budget}"
            )));
        }
        let inverse = gains.iter().map(|&g| snr_gap / g).collect();
        Ok(Self {
            gains,
            snr_gap,
            power_budget,
            inverse,
        })
    }

    /// Builds a gain vector from the per-subchannel ratios `Γ/δᵢ`.
    pub fn from_inverse(inverse: &[T], snr_gap: T, power_budget: T) -> Result<Self> {
        let gains = inverse.iter().map(|&r| snr_gap / r).collect();
        let mut v = Self::new(gains, snr_gap, power_budget)?;
        // Keep the caller's ratios bit-exact rather than Γ/(Γ/r).
        v.inverse = inverse.to_vec();
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    pub fn gains(&self) -> &[T] {
        &self.gains
    }

    pub fn snr_gap(&self) -> T {
        self.snr_gap
    }

    pub fn power_budget(&self) -> T {
        self.power_budget
    }

    pub fn inverse_gains(&self) -> &[T] {
        &self.inverse
    }

    /// Same gains and gap with a different budget.
    pub fn with_budget(&self, power_budget: T) -> Result<Self> {
        let mut v = self.clone();
        if !(power_budget > T::zero()) {
            return Err(Error::invalid("power budget must be positive"));
        }
        v.power_budget = power_budget;
        Ok(v)
    }
}

/// Outcome of one allocator run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationResult<T> {
    /// Bits per subchannel; empty for the continuous allocators.
    pub bits: Vec<u32>,
    pub powers: Vec<T>,
    pub iterations: u64,
    pub ledger: OpLedger,
    /// Shannon-gap capacity for continuous allocators.
    pub continuous_capacity: Option<T>,
}

impl<T: Real> AllocationResult<T> {
    pub fn is_discrete(&self) -> bool {
        self.continuous_capacity.is_none()
    }

    pub fn total_bits(&self) -> u64 {
        self.bits.iter().map(|&b| u64::from(b)).sum()
    }

    /// Bits per OFDMA symbol: `Σ bᵢ` for discrete loaders, otherwise the
    /// continuous capacity.
    pub fn capacity(&self) -> T {
        match self.continuous_capacity {
            Some(c) => c,
            None => T::from_u64(self.total_bits()).expect("bit count fits"),
        }
    }

    pub fn total_power(&self) -> T {
        self.powers.iter().copied().sum()
    }
}

/// `Σ log₂(1 + pᵢ·δᵢ/Γ)`.
pub fn capacity<T: Real>(powers: &[T], gains: &GainVector<T>) -> Result<T> {
    if powers.len() != gains.len() {
        return Err(Error::invalid(format!(
            "{} powers for {} subchannels",
            powers.len(),
            gains.len()
        )));
    }
    Ok(powers
        .iter()
        .zip(gains.gains())
        .map(|(&p, &g)| (T::one() + p * g / gains.snr_gap()).log2())
        .sum())
}

/// Energy to add one bit to a subchannel already carrying `current_bits`:
/// `2^b·Γ/δ`. The first bit uses `b = 0`.
pub fn incremental_cost<T: Real>(current_bits: u32, gain: T, gap: T) -> T {
    pow2::<T>(current_bits) * gap / gain
}

/// `(2^b − 1)·r`, the total energy of `b` bits at unit cost `r`.
pub(crate) fn loaded_power<T: Real>(bits: u32, unit: T) -> T {
    (pow2::<T>(bits) - T::one()) * unit
}

#[inline]
pub(crate) fn pow2<T: Real>(b: u32) -> T {
    T::lit(2.0).powi(b as i32)
}
