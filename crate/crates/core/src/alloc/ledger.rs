use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

/// Tally of arithmetic operations executed by an allocator run.
///
/// Counting convention for the greedy loaders: the normalized inverse gains
/// `Γ/δᵢ` are an input, so forming them is not charged. A minimum search over
/// `n` entries costs `2n` additions (one index step and one signed compare per
/// entry); the compares are also tallied in `comparisons_in_search`. Charging
/// a bit costs one addition for `P_alloc + Δε`, whose result is reused both
/// for the budget test and the update, then one exponentiation and one
/// multiplication to refresh `Δε = 2^b·Γ/δ`. Bit counters and loop control are
/// integer bookkeeping and not counted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpLedger {
    pub additions: u64,
    pub subtractions: u64,
    pub multiplications: u64,
    pub divisions: u64,
    pub exponentiations: u64,
    pub logarithms: u64,
    pub comparisons_in_search: u64,
}

impl OpLedger {
    /// Charges a linear scan over `n` candidates.
    pub(crate) fn scan(&mut self, n: usize) {
        self.additions += 2 * n as u64;
        self.comparisons_in_search += n as u64;
    }

    /// Charges one extra compare inside a search (e.g. an insertion step).
    pub(crate) fn compare(&mut self) {
        self.additions += 1;
        self.comparisons_in_search += 1;
    }

    /// Sum of the six arithmetic classes, excluding the search tally.
    pub fn arithmetic_total(&self) -> u64 {
        self.additions
            + self.subtractions
            + self.multiplications
            + self.divisions
            + self.exponentiations
            + self.logarithms
    }
}

impl Add for OpLedger {
    type Output = OpLedger;

    fn add(mut self, rhs: OpLedger) -> OpLedger {
        self += rhs;
        self
    }
}

impl AddAssign for OpLedger {
    fn add_assign(&mut self, rhs: OpLedger) {
        self.additions += rhs.additions;
        self.subtractions += rhs.subtractions;
        self.multiplications += rhs.multiplications;
        self.divisions += rhs.divisions;
        self.exponentiations += rhs.exponentiations;
        self.logarithms += rhs.logarithms;
        self.comparisons_in_search += rhs.comparisons_in_search;
    }
}

/// Operation counts predicted for a Hughes-Hartogs run over `n` subchannels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictedLedger {
    /// Executed once, before the loop.
    pub setup: OpLedger,
    /// Executed on every loop pass.
    pub per_iteration: OpLedger,
    /// Assumed number of passes; grows linearly, `v(n) = n`.
    pub iterations: u64,
}

impl PredictedLedger {
    pub fn total(&self) -> OpLedger {
        let k = self.iterations;
        let p = &self.per_iteration;
        self.setup
            + OpLedger {
                additions: p.additions * k,
                subtractions: p.subtractions * k,
                multiplications: p.multiplications * k,
                divisions: p.divisions * k,
                exponentiations: p.exponentiations * k,
                logarithms: p.logarithms * k,
                comparisons_in_search: p.comparisons_in_search * k,
            }
    }
}

/// Setup: `n` multiplications and `n` exponentiations. Per pass: `2n + 1`
/// additions (`n` of them compares in the minimum search), one
/// multiplication, one exponentiation.
pub fn ledger_predicted(n: usize) -> PredictedLedger {
    if n == 0 {
        return PredictedLedger::default();
    }
    let n64 = n as u64;
    PredictedLedger {
        setup: OpLedger {
            multiplications: n64,
            exponentiations: n64,
            ..OpLedger::default()
        },
        per_iteration: OpLedger {
            additions: 2 * n64 + 1,
            multiplications: 1,
            exponentiations: 1,
            comparisons_in_search: n64,
            ..OpLedger::default()
        },
        iterations: n64,
    }
}
