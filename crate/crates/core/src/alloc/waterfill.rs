use super::{capacity, AllocationResult, GainVector, OpLedger};
use crate::Real;

/// Uniform power `P_max/M` on every subchannel. Reports continuous capacity
/// only; the bit vector is left empty.
pub fn equal_power<T: Real>(gains: &GainVector<T>) -> AllocationResult<T> {
    let m = gains.len();
    let p = gains.power_budget() / T::from_count(m);
    let powers = vec![p; m];
    let cap = capacity(&powers, gains).expect("lengths match by construction");
    AllocationResult {
        bits: Vec::new(),
        powers,
        iterations: 0,
        ledger: OpLedger {
            divisions: 1,
            ..OpLedger::default()
        },
        continuous_capacity: Some(cap),
    }
}

/// Water-filling: `pᵢ = C_λ − Γ/δᵢ` with the water level
/// `C_λ = (P_max + Σ Γ/δᵢ) / |active|`.
///
/// Subchannels whose power comes out negative are dropped from the active set
/// and the level is recomputed over the survivors until every active power is
/// nonnegative. `iterations` counts level computations.
pub fn waterfill<T: Real>(gains: &GainVector<T>) -> AllocationResult<T> {
    let (powers, iterations, ledger) = water_powers(gains);
    let cap = capacity(&powers, gains).expect("lengths match by construction");
    AllocationResult {
        bits: Vec::new(),
        powers,
        iterations,
        ledger,
        continuous_capacity: Some(cap),
    }
}

/// Floors the water-filling rates to integer bits,
/// `b⁰ᵢ = ⌊log₂(1 + p⁰ᵢ·δᵢ/Γ)⌋`; inactive subchannels get zero.
pub fn wf_initial_bits<T: Real>(gains: &GainVector<T>) -> Vec<u32> {
    wf_bits_with_ledger(gains).0
}

pub(crate) fn wf_bits_with_ledger<T: Real>(gains: &GainVector<T>) -> (Vec<u32>, OpLedger) {
    let (powers, _, mut ledger) = water_powers(gains);
    let gap = gains.snr_gap();
    let bits = powers
        .iter()
        .zip(gains.gains())
        .map(|(&p, &g)| {
            if p > T::zero() {
                ledger.multiplications += 1;
                ledger.divisions += 1;
                ledger.additions += 1;
                ledger.logarithms += 1;
                let b = (T::one() + p * g / gap).log2().floor();
                b.to_u32().unwrap_or(0)
            } else {
                0
            }
        })
        .collect();
    (bits, ledger)
}

fn water_powers<T: Real>(gains: &GainVector<T>) -> (Vec<T>, u64, OpLedger) {
    let inv = gains.inverse_gains();
    let m = inv.len();
    let mut active = vec![true; m];
    let mut ledger = OpLedger::default();
    let mut iterations = 0u64;

    loop {
        iterations += 1;
        let count = active.iter().filter(|&&a| a).count();
        let sum: T = inv
            .iter()
            .zip(&active)
            .filter(|(_, &a)| a)
            .map(|(&r, _)| r)
            .sum();
        ledger.additions += count as u64;
        ledger.divisions += 1;
        let level = (gains.power_budget() + sum) / T::from_count(count);

        let mut dropped = false;
        for (r, a) in inv.iter().zip(active.iter_mut()) {
            if *a {
                ledger.subtractions += 1;
                ledger.comparisons_in_search += 1;
                if level - *r < T::zero() {
                    *a = false;
                    dropped = true;
                }
            }
        }
        // The strongest subchannel always has r <= level, so the set never
        // empties.
        if !dropped {
            let powers = inv
                .iter()
                .zip(&active)
                .map(|(&r, &a)| if a { level - r } else { T::zero() })
                .collect();
            return (powers, iterations, ledger);
        }
    }
}
