//! Threshold-based contiguous subcarrier grouping and the grouped greedy
//! allocator.
//!
//! A single left-to-right scan opens a group at its leader and admits each
//! following subcarrier while its gain in dB stays within `±G_T` of the
//! leader's. Each group is then represented by its weakest member, so the
//! allocator never assumes more gain than any member has.

use serde::{Deserialize, Serialize};

use crate::alloc::{greedy_fill, loaded_power, AllocationResult, GainVector};
use crate::{Error, Real, Result};

/// Contiguous cover of `0..M` by groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupPartition<T> {
    /// Start index of each group; the first is always 0.
    pub boundaries: Vec<usize>,
    /// Minimum member gain of each group.
    pub group_gains: Vec<T>,
    pub member_counts: Vec<usize>,
}

impl<T: Real> GroupPartition<T> {
    pub fn len(&self) -> usize {
        self.boundaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundaries.is_empty()
    }

    /// Number of subcarriers covered.
    pub fn n_members(&self) -> usize {
        self.member_counts.iter().sum()
    }

    /// Index range of group `g`.
    pub fn members(&self, g: usize) -> std::ops::Range<usize> {
        let start = self.boundaries[g];
        start..start + self.member_counts[g]
    }

    /// Iterator over `(leader, members)` of every group.
    pub fn groups(&self) -> impl Iterator<Item = std::ops::Range<usize>> + '_ {
        (0..self.len()).map(|g| self.members(g))
    }
}

fn to_db<T: Real>(x: T) -> T {
    T::lit(10.0) * x.log10()
}

/// Partitions `gains` with a dB threshold `gain_threshold_db`.
pub fn group_subcarriers<T: Real>(gains: &[T], gain_threshold_db: T) -> Result<GroupPartition<T>> {
    if gains.is_empty() {
        return Err(Error::invalid("cannot group an empty gain vector"));
    }
    if !(gain_threshold_db > T::zero()) {
        return Err(Error::invalid(format!(
            "gain threshold must be positive, got {gain_threshold_db} dB"
        )));
    }
    if let Some(i) = gains.iter().position(|g| !(*g > T::zero())) {
        return Err(Error::invalid(format!("gain {i} must be positive")));
    }

    let mut boundaries = vec![0usize];
    let mut leader_db = to_db(gains[0]);
    for (i, &g) in gains.iter().enumerate().skip(1) {
        let db = to_db(g);
        let inside = db >= leader_db - gain_threshold_db && db <= leader_db + gain_threshold_db;
        if !inside {
            boundaries.push(i);
            leader_db = db;
        }
    }

    let m = gains.len();
    let mut member_counts = Vec::with_capacity(boundaries.len());
    let mut group_gains = Vec::with_capacity(boundaries.len());
    for (j, &start) in boundaries.iter().enumerate() {
        let end = boundaries.get(j + 1).copied().unwrap_or(m);
        member_counts.push(end - start);
        let min = gains[start..end]
            .iter()
            .copied()
            .fold(T::infinity(), T::min);
        group_gains.push(min);
    }

    Ok(GroupPartition {
        boundaries,
        group_gains,
        member_counts,
    })
}

/// Result of the grouped allocator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupedAllocation<T> {
    /// Per-subcarrier bits and powers; powers are charged at the group gain.
    pub result: AllocationResult<T>,
    pub partition: GroupPartition<T>,
    /// `Σ log₂(1 + pᵢ·δᵢ/Γ)` at each subcarrier's own gain. Never below the
    /// loaded bit count, since every true gain is at least its group gain.
    pub true_gain_capacity: T,
}

/// Greedy bit loading over subcarrier groups.
///
/// Loading one bit on group `g` loads one bit on every member, at cost
/// `n_g·2^b_g·Γ/δ_g` where `δ_g` is the group gain. The loop otherwise
/// follows the plain greedy rules, with `kappa` groups per pass.
/// `iterations` counts group-level passes.
pub fn hh_grp_allocate<T: Real>(
    gains: &GainVector<T>,
    gain_threshold_db: T,
    kappa: usize,
) -> Result<GroupedAllocation<T>> {
    if kappa == 0 {
        return Err(Error::invalid("kappa must be at least 1"));
    }
    let partition = group_subcarriers(gains.gains(), gain_threshold_db)?;
    Ok(allocate_over_partition(gains, partition, kappa))
}

pub(crate) fn allocate_over_partition<T: Real>(
    gains: &GainVector<T>,
    partition: GroupPartition<T>,
    kappa: usize,
) -> GroupedAllocation<T> {
    let gap = gains.snr_gap();
    let group_inverse: Vec<T> = partition.group_gains.iter().map(|&g| gap / g).collect();
    let unit: Vec<T> = group_inverse
        .iter()
        .zip(&partition.member_counts)
        .map(|(&r, &n)| T::from_count(n) * r)
        .collect();

    let run = greedy_fill(&unit, gains.power_budget(), None, kappa, None);

    let m = gains.len();
    let mut bits = vec![0u32; m];
    let mut powers = vec![T::zero(); m];
    for (g, members) in partition.groups().enumerate() {
        let b = run.bits[g];
        let p = loaded_power(b, group_inverse[g]);
        for i in members {
            bits[i] = b;
            powers[i] = p;
        }
    }

    let true_gain_capacity = powers
        .iter()
        .zip(gains.gains())
        .map(|(&p, &d)| (T::one() + p * d / gap).log2())
        .sum();

    GroupedAllocation {
        result: AllocationResult {
            bits,
            powers,
            iterations: run.iterations,
            ledger: run.ledger,
            continuous_capacity: None,
        },
        partition,
        true_gain_capacity,
    }
}
