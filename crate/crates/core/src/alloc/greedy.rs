use super::waterfill::wf_bits_with_ledger;
use super::{loaded_power, pow2, AllocationResult, GainVector, OpLedger};
use crate::{Error, Real, Result};

/// Raw output of the greedy loop over abstract entities (subchannels or
/// subcarrier groups).
#[derive(Debug, Clone)]
pub(crate) struct GreedyRun {
    pub bits: Vec<u32>,
    pub iterations: u64,
    pub ledger: OpLedger,
}

/// Greedy bit loading by minimum incremental cost.
///
/// `unit_costs[e]` is the energy of the first bit on entity `e`; the `b`-th
/// extra bit costs `2^b·unit_costs[e]`. Each pass charges one bit to each of
/// the `kappa` cheapest distinct entities, in increasing cost order, and stops
/// for good at the first one that would push the spend past `budget`. Ties go
/// to the lowest index.
///
/// With `start` given, the loop is seeded with those bits. If the seed
/// overspends, bits are taken back one per pass from the entity whose last
/// bit was most expensive until the spend fits. Every pass of either phase
/// counts as an iteration.
pub(crate) fn greedy_fill<T: Real>(
    unit_costs: &[T],
    budget: T,
    start: Option<&[u32]>,
    kappa: usize,
    max_bits: Option<u32>,
) -> GreedyRun {
    let n = unit_costs.len();
    let cap = max_bits.unwrap_or(u32::MAX);
    let mut ledger = OpLedger::default();
    let mut bits: Vec<u32> = match start {
        Some(s) => s.iter().map(|&b| b.min(cap)).collect(),
        None => vec![0; n],
    };

    // Δεₑ = 2^bₑ·unitₑ
    let mut cost: Vec<T> = bits
        .iter()
        .zip(unit_costs)
        .map(|(&b, &u)| pow2::<T>(b) * u)
        .collect();
    ledger.exponentiations += n as u64;
    ledger.multiplications += n as u64;

    let mut spent = T::zero();
    if start.is_some() {
        for (&b, (&c, &u)) in bits.iter().zip(cost.iter().zip(unit_costs)) {
            if b > 0 {
                spent = spent + (c - u);
                ledger.subtractions += 1;
                ledger.additions += 1;
            }
        }
    }

    let mut iterations = 0u64;
    let half = T::lit(0.5);

    while spent > budget {
        iterations += 1;
        ledger.scan(n);
        let mut worst: Option<usize> = None;
        for e in 0..n {
            if bits[e] > 0 && worst.is_none_or(|w| cost[e] > cost[w]) {
                worst = Some(e);
            }
        }
        let Some(w) = worst else { break };
        let last = cost[w] * half;
        spent = spent - last;
        ledger.subtractions += 1;
        bits[w] -= 1;
        cost[w] = pow2::<T>(bits[w]) * unit_costs[w];
        ledger.exponentiations += 1;
        ledger.multiplications += 1;
    }

    let kappa = kappa.max(1).min(n.max(1));
    let mut picked: Vec<usize> = Vec::with_capacity(kappa);

    'fill: while spent < budget {
        iterations += 1;
        picked.clear();
        if kappa == 1 {
            ledger.scan(n);
            let mut best: Option<usize> = None;
            for e in 0..n {
                if bits[e] < cap && best.is_none_or(|b| cost[e] < cost[b]) {
                    best = Some(e);
                }
            }
            picked.extend(best);
        } else {
            select_cheapest(&cost, &bits, cap, kappa, &mut picked, &mut ledger);
        }
        if picked.is_empty() {
            break;
        }
        for &c in &picked {
            let candidate = spent + cost[c];
            ledger.additions += 1;
            if candidate > budget {
                break 'fill;
            }
            spent = candidate;
            bits[c] += 1;
            cost[c] = pow2::<T>(bits[c]) * unit_costs[c];
            ledger.exponentiations += 1;
            ledger.multiplications += 1;
        }
    }

    GreedyRun {
        bits,
        iterations,
        ledger,
    }
}

/// Indices of the `k` cheapest entities below the cap, ascending by
/// `(cost, index)`.
fn select_cheapest<T: Real>(
    cost: &[T],
    bits: &[u32],
    cap: u32,
    k: usize,
    out: &mut Vec<usize>,
    ledger: &mut OpLedger,
) {
    ledger.scan(cost.len());
    for e in 0..cost.len() {
        if bits[e] >= cap {
            continue;
        }
        if out.len() == k && cost[e] >= cost[out[k - 1]] {
            continue;
        }
        // Insert after every entry that is not more expensive, keeping the
        // lower index first among ties.
        let mut pos = out.len();
        while pos > 0 && cost[out[pos - 1]] > cost[e] {
            ledger.compare();
            pos -= 1;
        }
        out.insert(pos, e);
        out.truncate(k);
    }
}

/// Hughes-Hartogs bit loading.
///
/// With `initial_bits = None` and `kappa = 1` this is the classic loop: start
/// from zero bits, repeatedly load one bit on the subchannel with the
/// smallest incremental cost `2^bᵢ·Γ/δᵢ`, and stop before the first bit that
/// would exceed `P_max`. `kappa > 1` loads one bit on each of the `kappa`
/// cheapest subchannels per pass. `initial_bits` warm-starts the loop.
/// `max_bits` caps the bits per subchannel.
pub fn hh_allocate<T: Real>(
    gains: &GainVector<T>,
    initial_bits: Option<&[u32]>,
    kappa: usize,
    max_bits: Option<u32>,
) -> Result<AllocationResult<T>> {
    if kappa == 0 {
        return Err(Error::invalid("kappa must be at least 1"));
    }
    if let Some(b) = initial_bits {
        if b.len() != gains.len() {
            return Err(Error::invalid(format!(
                "{} initial bits for {} subchannels",
                b.len(),
                gains.len()
            )));
        }
    }
    let inv = gains.inverse_gains();
    let run = greedy_fill(inv, gains.power_budget(), initial_bits, kappa, max_bits);
    let powers = run
        .bits
        .iter()
        .zip(inv)
        .map(|(&b, &r)| loaded_power(b, r))
        .collect();
    Ok(AllocationResult {
        bits: run.bits,
        powers,
        iterations: run.iterations,
        ledger: run.ledger,
        continuous_capacity: None,
    })
}

/// Hughes-Hartogs warm-started from the floored water-filling bits. The
/// water-filling work is included in the ledger; `iterations` counts only
/// greedy passes.
pub fn hh_wf_allocate<T: Real>(
    gains: &GainVector<T>,
    kappa: usize,
    max_bits: Option<u32>,
) -> Result<AllocationResult<T>> {
    let (start, wf_ledger) = wf_bits_with_ledger(gains);
    let mut r = hh_allocate(gains, Some(&start), kappa, max_bits)?;
    r.ledger += wf_ledger;
    Ok(r)
}
