//! Summary statistics, the capacity/iteration tradeoff factor and the
//! analytic running-time model of the greedy loader.

use serde::{Deserialize, Serialize};

use crate::channel::TapSet;
use crate::grouping::GroupPartition;
use crate::{Error, Real, Result};

/// Trial-averaged figures for one allocator configuration at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub scenario_id: String,
    pub algorithm: String,
    pub param: String,
    pub n_subcarriers: usize,
    pub tau_max_us: f64,
    pub trials: usize,
    /// bits/s/Hz
    pub avg_capacity: Option<f64>,
    pub std_capacity: Option<f64>,
    pub avg_iterations: Option<f64>,
    pub std_iterations: Option<f64>,
    /// Total groups over all users per trial.
    pub avg_groups: Option<f64>,
    pub avg_group_correlation: Option<f64>,
    pub zeta: Option<f64>,
}

/// One `(τ_max, G_T)` cell's capacity and iterations together with the
/// extrema over the whole grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffInputs {
    pub capacity: f64,
    pub iterations: f64,
    pub capacity_min: f64,
    pub capacity_max: f64,
    pub iterations_min: f64,
    pub iterations_max: f64,
}

/// Total loaded bits per OFDMA symbol divided by the subchannel count.
pub fn spectral_efficiency<T: Real>(total_bits: T, n: usize) -> T {
    total_bits / T::from_count(n.max(1))
}

/// `ζ = ½·(1 + (C − C_min)/(C_max − C_min) − (I − I_min)/(I_max − I_min))`.
pub fn tradeoff_factor(inputs: &TradeoffInputs) -> Result<f64> {
    let TradeoffInputs {
        capacity,
        iterations,
        capacity_min,
        capacity_max,
        iterations_min,
        iterations_max,
    } = *inputs;
    if !(capacity_max > capacity_min) {
        return Err(Error::DegenerateRange(format!(
            "capacity range [{capacity_min}, {capacity_max}] is empty"
        )));
    }
    if !(iterations_max > iterations_min) {
        return Err(Error::DegenerateRange(format!(
            "iteration range [{iterations_min}, {iterations_max}] is empty"
        )));
    }
    let c = (capacity - capacity_min) / (capacity_max - capacity_min);
    let i = (iterations - iterations_min) / (iterations_max - iterations_min);
    Ok(0.5 * (1.0 + c - i))
}

/// `T(N) = N²·log₂N + 2N² + 5N`.
pub fn predicted_runtime(n: usize) -> f64 {
    let n = n as f64;
    n * n * n.log2() + 2.0 * n * n + 5.0 * n
}

/// How members are compared inside a group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorrelationMode {
    /// Leader against every member, the leader included.
    #[default]
    LeaderPairwise,
    /// Every ordered pair of members, self-pairs included.
    AllPairs,
}

/// Average `|ρ|` inside the groups of `partition`, weighted by member count.
///
/// `frequencies[i]` is the centre frequency of member `i`. Singleton groups
/// contribute 1.
pub fn group_correlation<T: Real>(
    partition: &GroupPartition<T>,
    taps: &TapSet<T>,
    frequencies: &[T],
    mode: CorrelationMode,
) -> T {
    let total = partition.n_members();
    if total == 0 {
        return T::one();
    }
    let rho = |a: usize, b: usize| -> T {
        taps.correlation(frequencies[b] - frequencies[a])
            .norm()
            .min(T::one())
    };
    let mut acc = T::zero();
    for members in partition.groups() {
        let n = members.len();
        let mean = match mode {
            CorrelationMode::LeaderPairwise => {
                let leader = members.start;
                members.map(|j| rho(leader, j)).sum::<T>() / T::from_count(n)
            }
            CorrelationMode::AllPairs => {
                let mut s = T::zero();
                for a in members.clone() {
                    for b in members.clone() {
                        s = s + rho(a, b);
                    }
                }
                s / T::from_count(n * n)
            }
        };
        acc = acc + mean * T::from_count(n);
    }
    acc / T::from_count(total)
}

/// Mean and sample standard deviation, summed in slice order.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
