//! Strategies, independent oracles and invariant checks shared by the
//! property suite and the acceptance suite.
#![allow(dead_code)]

use bitload::alloc::{
    equal_power, hh_allocate, hh_wf_allocate, ledger_predicted, waterfill, GainVector,
};
use bitload::channel::{assign_subcarriers, realize_channel, SystemParams};
use bitload::grouping::{group_subcarriers, hh_grp_allocate};
use bitload::harness::{csv_string, run_scenario, trial_rng, ScenarioFile};
use bitload::metrics::{
    group_correlation, predicted_runtime, spectral_efficiency, tradeoff_factor, CorrelationMode,
    TradeoffInputs,
};
use bitload::GainVector64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub type Check = Result<(), TestCaseError>;

/// Relative slack for budget checks on discrete loaders. Powers are rebuilt
/// as `(2^b − 1)·Γ/δ` after the loop accumulated them bit by bit, so the two
/// sums can differ in the last ulps.
pub const BUDGET_RTOL: f64 = 1e-12;

// ---- strategies ----

pub fn instance() -> impl Strategy<Value = GainVector64> {
    (
        prop::collection::vec(0.01f64..50.0, 1..24),
        1.0f64..20.0,
        0.1f64..200.0,
    )
        .prop_map(|(g, gap, p)| GainVector::new(g, gap, p).unwrap())
}

/// `Γ/δᵢ ∈ [0.1, 10]`, `M ∈ 2..=8` and a budget below `13·min Γ/δ`, which
/// admits at most 12 bits in total since `2^b − 1 ≥ b`.
pub fn enumerable() -> impl Strategy<Value = GainVector64> {
    (prop::collection::vec(0.1f64..10.0, 2..=8), 0.0f64..1.0).prop_map(|(inv, frac)| {
        let rmin = inv.iter().copied().fold(f64::INFINITY, f64::min);
        GainVector::from_inverse(&inv, 1.0, rmin * (1.0 + 12.0 * frac)).unwrap()
    })
}

pub fn db_gains() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-20.0f64..20.0, 1..64)
        .prop_map(|db| db.iter().map(|d| 10f64.powf(d / 10.0)).collect())
}

// ---- oracles ----

/// Largest total bit count over all integer vectors with
/// `Σ (2^bᵢ − 1)·rᵢ ≤ budget`, by exhaustive enumeration.
pub fn brute_force_max_bits(inverse: &[f64], budget: f64) -> u32 {
    fn go(inv: &[f64], left: f64) -> u32 {
        let Some((&r, rest)) = inv.split_first() else {
            return 0;
        };
        let mut best = 0;
        let mut b = 0u32;
        loop {
            let cost = ((1u64 << b) - 1) as f64 * r;
            if cost > left {
                break;
            }
            best = best.max(b + go(rest, left - cost));
            b += 1;
        }
        best
    }
    go(inverse, budget)
}

pub fn rate(powers: &[f64], gains: &GainVector64) -> f64 {
    powers
        .iter()
        .zip(gains.gains())
        .map(|(&p, &d)| (1.0 + p * d / gains.snr_gap()).log2())
        .sum()
}

// ---- checks ----

pub fn budget_safety(g: &GainVector64) -> Check {
    let p = g.power_budget();
    let discrete = [
        hh_allocate(g, None, 1, None).unwrap(),
        hh_allocate(g, None, 2, None).unwrap(),
        hh_allocate(g, None, 5, None).unwrap(),
        hh_wf_allocate(g, 1, None).unwrap(),
        hh_grp_allocate(g, 1.0, 1).unwrap().result,
    ];
    for r in &discrete {
        prop_assert!(
            r.total_power() <= p * (1.0 + BUDGET_RTOL),
            "{} > {p}",
            r.total_power()
        );
        prop_assert!(r.powers.iter().all(|&x| x >= 0.0));
    }
    let wf = waterfill(g);
    prop_assert!(wf.total_power() <= p * (1.0 + 1e-9));
    prop_assert!(wf.powers.iter().all(|&x| x >= 0.0));
    Ok(())
}

pub fn hh_is_optimal(g: &GainVector64) -> Check {
    let r = hh_allocate(g, None, 1, None).unwrap();
    let best = brute_force_max_bits(g.inverse_gains(), g.power_budget());
    prop_assert_eq!(r.total_bits(), best as u64);
    Ok(())
}

pub fn cost_bit_consistency(g: &GainVector64) -> Check {
    let runs = [
        hh_allocate(g, None, 1, None).unwrap(),
        hh_allocate(g, None, 3, None).unwrap(),
        hh_wf_allocate(g, 1, None).unwrap(),
    ];
    for r in &runs {
        for ((&b, &p), &d) in r.bits.iter().zip(&r.powers).zip(g.gains()) {
            let expect = ((1u64 << b) - 1) as f64 * (g.snr_gap() / d);
            prop_assert_eq!(p, expect);
        }
    }
    Ok(())
}

pub fn wf_dominance(g: &GainVector64) -> Check {
    let wf = waterfill(g).capacity();
    let eq = equal_power(g).capacity();
    prop_assert!(eq <= wf + 1e-9, "EQ {eq} > WF {wf}");
    for r in [
        hh_allocate(g, None, 1, None).unwrap(),
        hh_allocate(g, None, 4, None).unwrap(),
        hh_wf_allocate(g, 1, None).unwrap(),
        hh_grp_allocate(g, 0.5, 1).unwrap().result,
    ] {
        prop_assert!(
            r.capacity() <= wf + 1e-9,
            "discrete {} > WF {wf}",
            r.capacity()
        );
    }
    Ok(())
}

pub fn kappa_monotone(g: &GainVector64) -> Check {
    let runs: Vec<_> = [1, 2, 4, 8, 16]
        .iter()
        .map(|&k| hh_allocate(g, None, k, None).unwrap())
        .collect();
    for w in runs.windows(2) {
        prop_assert!(w[1].total_bits() <= w[0].total_bits());
        prop_assert!(w[1].iterations <= w[0].iterations);
    }
    Ok(())
}

pub fn scale_equivariance(g: &GainVector64, k: i32) -> Check {
    let c = 2f64.powi(k);
    let scaled = GainVector::new(
        g.gains().iter().map(|&d| d * c).collect(),
        g.snr_gap(),
        g.power_budget() / c,
    )
    .unwrap();
    let a = hh_allocate(g, None, 1, None).unwrap();
    let b = hh_allocate(&scaled, None, 1, None).unwrap();
    prop_assert_eq!(a.bits, b.bits);
    Ok(())
}

pub fn ledger_agreement(n: usize) -> Check {
    let g = GainVector::from_inverse(&vec![1.0; n], 1.0, n as f64).unwrap();
    let r = hh_allocate(&g, None, 1, None).unwrap();
    prop_assert_eq!(r.iterations, n as u64);
    prop_assert_eq!(r.ledger, ledger_predicted(n).total());
    Ok(())
}

pub fn partition_validity(gains: &[f64], gt: f64) -> Check {
    let p = group_subcarriers(gains, gt).unwrap();
    prop_assert_eq!(p.n_members(), gains.len());
    prop_assert_eq!(p.boundaries[0], 0);
    prop_assert!(p.boundaries.windows(2).all(|w| w[0] < w[1]));
    for (gi, members) in p.groups().enumerate() {
        let lead = 10.0 * gains[members.start].log10();
        for i in members {
            prop_assert!(p.group_gains[gi] <= gains[i]);
            let db = 10.0 * gains[i].log10();
            prop_assert!((db - lead).abs() <= gt + 1e-9);
        }
    }
    Ok(())
}

pub fn grouped_never_beats_plain(gains: &[f64], gt: f64) -> Check {
    let g = GainVector::new(gains.to_vec(), 2.0, gains.len() as f64 * 3.0).unwrap();
    let grouped = hh_grp_allocate(&g, gt, 1).unwrap();
    let plain = hh_allocate(&g, None, 1, None).unwrap();
    prop_assert!(grouped.result.total_bits() <= plain.total_bits());
    prop_assert!(grouped.result.total_power() <= g.power_budget() * (1.0 + BUDGET_RTOL));
    prop_assert!(grouped.true_gain_capacity >= grouped.result.capacity() - 1e-9);
    Ok(())
}

pub fn monotone_coarsening(gains: &[f64], gt_lo: f64, gt_hi: f64) -> Check {
    let lo = group_subcarriers(gains, gt_lo).unwrap().len();
    let hi = group_subcarriers(gains, gt_hi).unwrap().len();
    prop_assert!(
        hi <= lo,
        "G_T {gt_lo} -> {lo} groups, G_T {gt_hi} -> {hi} groups"
    );
    Ok(())
}

pub fn degenerate_thresholds(gains: &[f64]) -> Check {
    let g = GainVector::new(gains.to_vec(), 1.5, gains.len() as f64 * 2.0).unwrap();
    // Below the smallest nonzero dB gap every subcarrier is its own group.
    let tiny = hh_grp_allocate(&g, 1e-12, 1).unwrap();
    let plain = hh_allocate(&g, None, 1, None).unwrap();
    let distinct_neighbours = gains.windows(2).all(|w| w[0] != w[1]);
    if distinct_neighbours {
        prop_assert_eq!(tiny.partition.len(), gains.len());
        prop_assert_eq!(&tiny.result.bits, &plain.bits);
    }
    // Above the full dB spread everything is one group at the minimum gain.
    let huge = hh_grp_allocate(&g, 1e6, 1).unwrap();
    prop_assert_eq!(huge.partition.len(), 1);
    let b0 = huge.result.bits[0];
    prop_assert!(huge.result.bits.iter().all(|&b| b == b0));
    Ok(())
}

pub fn assignment_partition(k: usize, per_user: usize) -> Check {
    let n = k * per_user;
    let a = assign_subcarriers(n, k).unwrap();
    let mut seen = vec![0u32; n];
    for u in 0..k {
        for i in a.block(u) {
            seen[i] += 1;
            prop_assert_eq!(a.user_of(i), u);
        }
    }
    prop_assert!(seen.iter().all(|&c| c == 1));
    Ok(())
}

fn small_params(per_user: usize, tau_us: f64) -> SystemParams<f64> {
    SystemParams {
        n_subcarriers: 4 * per_user,
        n_users: 4,
        tau_max_s: tau_us * 1e-6,
        ..SystemParams::default()
    }
}

pub fn gains_match_coefficients(seed: u64, per_user: usize, tau_us: f64) -> Check {
    let params = small_params(per_user, tau_us);
    let ch = realize_channel(&params, &mut trial_rng(seed, 0)).unwrap();
    let nb = params.noise_density_w_hz * params.subchannel_bandwidth();
    for (gk, hk) in ch.gains.iter().zip(&ch.coefficients) {
        for (&g, h) in gk.iter().zip(hk) {
            let h2 = h.norm_sqr();
            prop_assert!((g * nb - h2).abs() <= 1e-12 * h2, "{} vs {h2}", g * nb);
        }
    }
    Ok(())
}

pub fn realization_determinism(seed: u64, per_user: usize, tau_us: f64) -> Check {
    let params = small_params(per_user, tau_us);
    let a = realize_channel(&params, &mut trial_rng(seed, 3)).unwrap();
    let b = realize_channel(&params, &mut trial_rng(seed, 3)).unwrap();
    prop_assert_eq!(a, b);
    Ok(())
}

pub fn correlation_bounds(seed: u64, gt: f64, tau_us: f64) -> Check {
    let params = small_params(32, tau_us);
    let ch = realize_channel(&params, &mut trial_rng(seed, 1)).unwrap();
    for u in 0..params.n_users {
        let p = group_subcarriers(ch.user_gains(u), gt).unwrap();
        let f = params.frequencies(ch.assignment.block(u));
        for mode in [CorrelationMode::LeaderPairwise, CorrelationMode::AllPairs] {
            let c = group_correlation(&p, &ch.taps[u], &f, mode);
            prop_assert!((0.0..=1.0).contains(&c), "{c}");
        }
        prop_assert_eq!(ch.taps[u].correlation(0.0).re, 1.0);
        prop_assert_eq!(ch.taps[u].correlation(0.0).im, 0.0);
    }
    Ok(())
}

pub fn zeta_affine_invariance(
    cells: &[(f64, f64)],
    idx: usize,
    (a, b): (f64, f64),
    (c, d): (f64, f64),
) -> Check {
    let zeta = |cells: &[(f64, f64)]| {
        let cmin = cells.iter().map(|x| x.0).fold(f64::INFINITY, f64::min);
        let cmax = cells.iter().map(|x| x.0).fold(f64::NEG_INFINITY, f64::max);
        let imin = cells.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
        let imax = cells.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
        tradeoff_factor(&TradeoffInputs {
            capacity: cells[idx].0,
            iterations: cells[idx].1,
            capacity_min: cmin,
            capacity_max: cmax,
            iterations_min: imin,
            iterations_max: imax,
        })
    };
    let Ok(z0) = zeta(cells) else {
        return Ok(());
    };
    let moved: Vec<(f64, f64)> = cells.iter().map(|&(x, y)| (a * x + b, c * y + d)).collect();
    let z1 = zeta(&moved).unwrap();
    prop_assert!((0.0..=1.0).contains(&z0));
    prop_assert!((z0 - z1).abs() < 1e-9, "{z0} vs {z1}");
    Ok(())
}

pub fn metric_shapes(n: usize, bits: u32, k: u32) -> Check {
    prop_assert!(predicted_runtime(n + 1) > predicted_runtime(n));
    let one = spectral_efficiency(bits as f64, n);
    let many = spectral_efficiency(bits as f64 * k as f64, n);
    prop_assert!((many - one * k as f64).abs() <= 1e-12 * many.abs().max(1.0));
    Ok(())
}

pub fn per_trial_orderings(g: &GainVector64) -> Check {
    let wf = waterfill(g).capacity();
    let hh = hh_allocate(g, None, 1, None).unwrap().capacity();
    prop_assert!(wf + 1e-9 >= hh);
    for k in [2, 4, 8, 16] {
        let hk = hh_allocate(g, None, k, None).unwrap().capacity();
        prop_assert!(hh >= hk);
    }
    for gt in [0.25, 0.5, 1.0, 5.0] {
        let grp = hh_grp_allocate(g, gt, 1).unwrap().result.capacity();
        prop_assert!(hh >= grp);
    }
    Ok(())
}

/// Same scenario and seed on one and on four worker threads gives the same
/// CSV text.
pub fn harness_determinism(seed: u64, trials: usize) -> Check {
    let text = format!(
        "n_subcarriers = 64\ntrials = {trials}\nseed = {seed}\nalgorithms = [\"WF\", \"HH\", \"HH-K\", \"HH-GRP\"]\nkappa_list = [4]\ngt_db_list = [1.0]\n"
    );
    let s = ScenarioFile::from_toml_str(&text)
        .unwrap()
        .to_scenario()
        .unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| csv_string(&run_scenario(&s).unwrap()))
    };
    prop_assert_eq!(run(1), run(4));
    Ok(())
}

// ---- runner used by the acceptance suite ----

/// Runs `check` on `cases` generated inputs with a fixed RNG. Returns the
/// number of cases run or the failure message.
pub fn run_cases<S: Strategy>(
    cases: u32,
    strategy: S,
    check: impl Fn(S::Value) -> Check,
) -> Result<u32, String> {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner =
        TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner
        .run(&strategy, check)
        .map(|()| cases)
        .map_err(|e| e.to_string())
}

/// Every invariant with its case count, in a fixed order.
pub fn invariant_suite() -> Vec<(&'static str, Result<u32, String>)> {
    vec![
        (
            "budget safety",
            run_cases(1500, instance(), |g| budget_safety(&g)),
        ),
        (
            "HH optimality",
            run_cases(1000, enumerable(), |g| hh_is_optimal(&g)),
        ),
        (
            "cost-bit consistency",
            run_cases(1000, instance(), |g| cost_bit_consistency(&g)),
        ),
        (
            "WF dominance / EQ bound",
            run_cases(1000, instance(), |g| wf_dominance(&g)),
        ),
        (
            "kappa monotonicity",
            run_cases(1000, instance(), |g| kappa_monotone(&g)),
        ),
        (
            "scale equivariance",
            run_cases(1000, (instance(), -10i32..10), |(g, k)| {
                scale_equivariance(&g, k)
            }),
        ),
        (
            "ledger agreement",
            run_cases(200, 1usize..300, ledger_agreement),
        ),
        (
            "partition validity",
            run_cases(1000, (db_gains(), 0.01f64..10.0), |(g, t)| {
                partition_validity(&g, t)
            }),
        ),
        (
            "conservative grouping",
            run_cases(500, (db_gains(), 0.01f64..10.0), |(g, t)| {
                grouped_never_beats_plain(&g, t)
            }),
        ),
        (
            "monotone coarsening",
            run_cases(
                1000,
                (db_gains(), 0.01f64..5.0, 0.0f64..5.0),
                |(g, lo, d)| monotone_coarsening(&g, lo, lo + d),
            ),
        ),
        (
            "degenerate thresholds",
            run_cases(500, db_gains(), |g| degenerate_thresholds(&g)),
        ),
        (
            "assignment partition",
            run_cases(300, (1usize..16, 1usize..64), |(k, m)| {
                assignment_partition(k, m)
            }),
        ),
        (
            "gain normalization",
            run_cases(
                200,
                (any::<u64>(), 1usize..32, 0.5f64..25.0),
                |(s, m, t)| gains_match_coefficients(s, m, t),
            ),
        ),
        (
            "realization determinism",
            run_cases(
                200,
                (any::<u64>(), 1usize..32, 0.5f64..25.0),
                |(s, m, t)| realization_determinism(s, m, t),
            ),
        ),
        (
            "correlation bounds",
            run_cases(
                200,
                (any::<u64>(), 0.05f64..6.0, 0.5f64..25.0),
                |(s, g, t)| correlation_bounds(s, g, t),
            ),
        ),
        (
            "zeta affine invariance",
            run_cases(
                500,
                (
                    prop::collection::vec((0.0f64..10.0, 1.0f64..1e4), 2..12),
                    any::<prop::sample::Index>(),
                    (0.1f64..10.0, -5.0f64..5.0),
                    (0.1f64..10.0, -50.0f64..50.0),
                ),
                |(cells, i, ab, cd)| zeta_affine_invariance(&cells, i.index(cells.len()), ab, cd),
            ),
        ),
        (
            "metric shapes",
            run_cases(
                500,
                (1usize..100_000, 0u32..100_000, 1u32..64),
                |(n, b, k)| metric_shapes(n, b, k),
            ),
        ),
        (
            "per-trial orderings",
            run_cases(1000, instance(), |g| per_trial_orderings(&g)),
        ),
        (
            "harness determinism",
            run_cases(20, (0u64..i64::MAX as u64, 1usize..6), |(s, t)| {
                harness_determinism(s, t)
            }),
        ),
    ]
}
