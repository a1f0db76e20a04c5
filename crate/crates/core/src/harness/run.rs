use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::output::format_sig;
use super::scenario::{AllocatorSpec, Scenario};
use crate::alloc::{equal_power, hh_allocate, hh_wf_allocate, waterfill, GainVector};
use crate::channel::{realize_channel, SystemParams};
use crate::grouping::{group_subcarriers, hh_grp_allocate};
use crate::metrics::{
    group_correlation, mean_std, tradeoff_factor, CorrelationMode, MetricsSummary, TradeoffInputs,
};
use crate::{AllocationResult64, Error, Result};

/// RNG for one trial. Every trial owns a separate ChaCha stream under the
/// master seed, so trial `t` sees the same draws at every sweep point and
/// regardless of thread count.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// What to evaluate on each realization.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Job {
    Alloc(AllocatorSpec),
    /// Partition only, no allocation.
    Group(f64),
}

impl Job {
    fn name(&self) -> &'static str {
        match self {
            Job::Alloc(a) => a.name(),
            Job::Group(_) => "GROUPS",
        }
    }

    fn param(&self) -> String {
        match self {
            Job::Alloc(a) => a.param(),
            Job::Group(gt) => format!("gt_db={gt}"),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct JobMetrics {
    capacity: Option<f64>,
    iterations: Option<f64>,
    groups: Option<f64>,
    correlation: Option<f64>,
}

/// Per-user allocations of one allocator in one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocatorTrial {
    pub allocator: AllocatorSpec,
    pub per_user: Vec<AllocationResult64>,
    /// Groups per user, for grouped allocators.
    pub groups: Option<Vec<usize>>,
    /// Grouped allocators only: per-user `Σ log₂(1 + pᵢ·δᵢ/Γ)` at the true
    /// member gains, next to the planned bits in `per_user`.
    pub true_gain_capacity: Option<Vec<f64>>,
}

/// Everything computed in one trial at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub scenario_id: String,
    pub trial: u64,
    pub user_distances_m: Vec<f64>,
    pub allocators: Vec<AllocatorTrial>,
}

/// Summaries plus, on request, the per-trial records.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutput {
    pub summaries: Vec<MetricsSummary>,
    pub records: Vec<TrialRecord>,
}

pub fn scenario_id(n: usize, tau_max_s: f64) -> String {
    format!("N{n}_tau{}us", format_sig(tau_max_s * 1e6))
}

fn point_params(s: &Scenario, n: usize, tau: f64) -> SystemParams<f64> {
    SystemParams {
        n_subcarriers: n,
        tau_max_s: tau,
        ..s.system.clone()
    }
}

fn run_trial(
    params: &SystemParams<f64>,
    gap: f64,
    pmax: f64,
    jobs: &[Job],
    seed: u64,
    trial: u64,
    keep: bool,
) -> Result<(Vec<JobMetrics>, Option<TrialRecord>)> {
    let mut rng = trial_rng(seed, trial);
    let ch = realize_channel(params, &mut rng)?;
    let k = ch.n_users();
    let n = params.n_subcarriers;
    let users: Vec<GainVector<f64>> = (0..k)
        .map(|u| GainVector::new(ch.user_gains(u).to_vec(), gap, pmax))
        .collect::<Result<_>>()?;
    let freqs: Vec<Vec<f64>> = (0..k)
        .map(|u| params.frequencies(ch.assignment.block(u)))
        .collect();

    let mut metrics = Vec::with_capacity(jobs.len());
    let mut kept = Vec::new();
    for job in jobs {
        let mut m = JobMetrics::default();
        match *job {
            Job::Alloc(spec) => {
                let mut per_user = Vec::with_capacity(k);
                let mut groups = Vec::new();
                let mut true_caps = Vec::new();
                let mut corr = 0.0;
                for (u, g) in users.iter().enumerate() {
                    let r = match spec {
                        AllocatorSpec::Eq => equal_power(g),
                        AllocatorSpec::Wf => waterfill(g),
                        AllocatorSpec::Hh => hh_allocate(g, None, 1, None)?,
                        AllocatorSpec::HhWf => hh_wf_allocate(g, 1, None)?,
                        AllocatorSpec::HhK(kappa) => hh_allocate(g, None, kappa, None)?,
                        AllocatorSpec::HhGrp(gt) => {
                            let ga = hh_grp_allocate(g, gt, 1)?;
                            groups.push(ga.partition.len());
                            true_caps.push(ga.true_gain_capacity);
                            corr += group_correlation(
                                &ga.partition,
                                &ch.taps[u],
                                &freqs[u],
                                CorrelationMode::LeaderPairwise,
                            );
                            ga.result
                        }
                    };
                    per_user.push(r);
                }
                let total: f64 = per_user.iter().map(|r| r.capacity()).sum();
                m.capacity = Some(total / n as f64);
                if !spec.is_continuous() {
                    let it: u64 = per_user.iter().map(|r| r.iterations).sum();
                    m.iterations = Some(it as f64 / k as f64);
                }
                if !groups.is_empty() {
                    m.groups = Some(groups.iter().sum::<usize>() as f64);
                    m.correlation = Some(corr / k as f64);
                }
                if keep {
                    kept.push(AllocatorTrial {
                        allocator: spec,
                        per_user,
                        groups: (!groups.is_empty()).then_some(groups),
                        true_gain_capacity: (!true_caps.is_empty()).then_some(true_caps),
                    });
                }
            }
            Job::Group(gt) => {
                let mut total = 0usize;
                let mut corr = 0.0;
                for (u, g) in users.iter().enumerate() {
                    let p = group_subcarriers(g.gains(), gt)?;
                    total += p.len();
                    corr += group_correlation(
                        &p,
                        &ch.taps[u],
                        &freqs[u],
                        CorrelationMode::LeaderPairwise,
                    );
                }
                m.groups = Some(total as f64);
                m.correlation = Some(corr / k as f64);
            }
        }
        metrics.push(m);
    }

    let record = keep.then(|| TrialRecord {
        scenario_id: scenario_id(n, params.tau_max_s),
        trial,
        user_distances_m: ch.user_distances.clone(),
        allocators: kept,
    });
    Ok((metrics, record))
}

fn run_jobs(s: &Scenario, jobs: &[Job], keep: bool) -> Result<ScenarioOutput> {
    let gap = s.gamma.resolve()?;
    let mut out = ScenarioOutput::default();
    for (n, tau) in s.sweep_points() {
        let params = point_params(s, n, tau);
        params.validate()?;
        let trials: Vec<(Vec<JobMetrics>, Option<TrialRecord>)> = (0..s.trials as u64)
            .into_par_iter()
            .map(|t| run_trial(&params, gap, s.pmax_w, jobs, s.master_seed, t, keep))
            .collect::<Result<_>>()?;

        let id = scenario_id(n, tau);
        for (j, job) in jobs.iter().enumerate() {
            let column = |f: fn(&JobMetrics) -> Option<f64>| -> Option<Vec<f64>> {
                trials.iter().map(|(m, _)| f(&m[j])).collect()
            };
            let cap = column(|m| m.capacity).map(|v| mean_std(&v));
            let it = column(|m| m.iterations).map(|v| mean_std(&v));
            let groups = column(|m| m.groups).map(|v| mean_std(&v).0);
            let corr = column(|m| m.correlation).map(|v| mean_std(&v).0);
            out.summaries.push(MetricsSummary {
                scenario_id: id.clone(),
                algorithm: job.name().to_string(),
                param: job.param(),
                n_subcarriers: n,
                tau_max_us: tau * 1e6,
                trials: s.trials,
                avg_capacity: cap.map(|c| c.0),
                std_capacity: cap.map(|c| c.1),
                avg_iterations: it.map(|i| i.0),
                std_iterations: it.map(|i| i.1),
                avg_groups: groups,
                avg_group_correlation: corr,
                zeta: None,
            });
        }
        if keep {
            out.records
                .extend(trials.into_iter().filter_map(|(_, r)| r));
        }
    }
    Ok(out)
}

/// Runs every allocator of `s` at every sweep point. All allocators see the
/// same channel within a trial.
pub fn run_scenario(s: &Scenario) -> Result<Vec<MetricsSummary>> {
    Ok(run_scenario_detailed(s, false)?.summaries)
}

/// As [`run_scenario`], optionally keeping every per-trial allocation.
pub fn run_scenario_detailed(s: &Scenario, keep_records: bool) -> Result<ScenarioOutput> {
    let jobs: Vec<Job> = s.allocators.iter().map(|&a| Job::Alloc(a)).collect();
    run_jobs(s, &jobs, keep_records)
}

/// Group counts and in-group correlation for every threshold in
/// `s.gt_db_list`, without running an allocator.
pub fn run_grouping_stats(s: &Scenario) -> Result<Vec<MetricsSummary>> {
    if s.gt_db_list.is_empty() {
        return Err(Error::invalid(
            "grouping statistics need at least one threshold",
        ));
    }
    let jobs: Vec<Job> = s.gt_db_list.iter().map(|&g| Job::Group(g)).collect();
    Ok(run_jobs(s, &jobs, false)?.summaries)
}

/// One `(τ_max, G_T)` point of the tradeoff surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffCell {
    pub tau_max_s: f64,
    pub gt_db: f64,
    pub summary: MetricsSummary,
    pub zeta: f64,
}

/// Grouped-allocator results over a `τ_max × G_T` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffGrid {
    pub tau_max_s: Vec<f64>,
    pub gt_db: Vec<f64>,
    /// Row-major: `cells[i * gt_db.len() + j]` is `(tau_max_s[i], gt_db[j])`.
    pub cells: Vec<TradeoffCell>,
}

impl TradeoffGrid {
    pub fn cell(&self, tau_index: usize, gt_index: usize) -> &TradeoffCell {
        &self.cells[tau_index * self.gt_db.len() + gt_index]
    }

    pub fn row(&self, tau_index: usize) -> &[TradeoffCell] {
        let w = self.gt_db.len();
        &self.cells[tau_index * w..(tau_index + 1) * w]
    }

    /// Threshold with the largest ζ in each row; ties keep the smallest.
    pub fn best_gt_per_tau(&self) -> Vec<f64> {
        (0..self.tau_max_s.len())
            .map(|i| {
                let row = self.row(i);
                let mut best = 0;
                for (j, c) in row.iter().enumerate() {
                    if c.zeta > row[best].zeta {
                        best = j;
                    }
                }
                row[best].gt_db
            })
            .collect()
    }

    pub fn summaries(&self) -> Vec<MetricsSummary> {
        self.cells.iter().map(|c| c.summary.clone()).collect()
    }
}

/// Runs the grouped allocator over `s.sweep.tau_max_s × s.gt_db_list` at
/// `s.system.n_subcarriers` and computes ζ with extrema taken over the whole
/// grid. Needs at least two points on each axis.
pub fn run_tradeoff_grid(s: &Scenario) -> Result<TradeoffGrid> {
    let taus = s.sweep.tau_max_s.clone().unwrap_or_default();
    let gts = s.gt_db_list.clone();
    let mut bad = Vec::new();
    if taus.len() < 2 {
        bad.push(format!(
            "tradeoff grid needs at least 2 tau_max values, got {}",
            taus.len()
        ));
    }
    if gts.len() < 2 {
        bad.push(format!(
            "tradeoff grid needs at least 2 gt_db values, got {}",
            gts.len()
        ));
    }
    if !bad.is_empty() {
        return Err(Error::Config(bad));
    }

    let grid_scenario = Scenario {
        allocators: gts.iter().map(|&g| AllocatorSpec::HhGrp(g)).collect(),
        sweep: super::scenario::Sweep {
            n_subcarriers: None,
            tau_max_s: Some(taus.clone()),
        },
        ..s.clone()
    };
    let summaries = run_scenario(&grid_scenario)?;

    let caps: Vec<f64> = summaries
        .iter()
        .map(|m| m.avg_capacity.unwrap_or(f64::NAN))
        .collect();
    let its: Vec<f64> = summaries
        .iter()
        .map(|m| m.avg_iterations.unwrap_or(f64::NAN))
        .collect();
    let (cmin, cmax) = min_max(&caps);
    let (imin, imax) = min_max(&its);

    let mut cells = Vec::with_capacity(summaries.len());
    for (idx, mut summary) in summaries.into_iter().enumerate() {
        let zeta = tradeoff_factor(&TradeoffInputs {
            capacity: caps[idx],
            iterations: its[idx],
            capacity_min: cmin,
            capacity_max: cmax,
            iterations_min: imin,
            iterations_max: imax,
        })?;
        summary.zeta = Some(zeta);
        cells.push(TradeoffCell {
            tau_max_s: taus[idx / gts.len()],
            gt_db: gts[idx % gts.len()],
            summary,
            zeta,
        });
    }
    Ok(TradeoffGrid {
        tau_max_s: taus,
        gt_db: gts,
        cells,
    })
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}
