//! Seeded Monte Carlo experiments: scenario files, parallel trial runs and
//! result files.

mod gainfile;
mod output;
mod run;
mod scenario;

pub use gainfile::{parse_gain_file, read_gain_file};
pub use output::{
    csv_string, dump_results, format_sig, format_table, plot_series, write_csv, write_plot_data,
    OutputFormat, CSV_COLUMNS,
};
pub use run::{
    run_grouping_stats, run_scenario, run_scenario_detailed, run_tradeoff_grid, scenario_id,
    trial_rng, AllocatorTrial, ScenarioOutput, TradeoffCell, TradeoffGrid, TrialRecord,
};
pub use scenario::{
    apply_overrides, load_scenario, parse_override, AllocatorSpec, GammaSpec, Scenario,
    ScenarioFile, Sweep, ALGORITHM_NAMES, DEFAULT_BER, DEFAULT_GT_DB, DEFAULT_KAPPAS,
    DEFAULT_PMAX_W, DEFAULT_SEED, DEFAULT_TRIALS, SCENARIO_KEYS,
};
