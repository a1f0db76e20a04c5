use std::path::PathBuf;
use std::process::ExitCode;

use bitload::alloc::{
    equal_power, hh_allocate, hh_wf_allocate, ledger_predicted, waterfill, OpLedger,
};
use bitload::grouping::hh_grp_allocate;
use bitload::harness::{
    dump_results, format_sig, format_table, load_scenario, parse_override, read_gain_file,
    run_grouping_stats, run_scenario_detailed, run_tradeoff_grid, OutputFormat, Scenario,
    ScenarioOutput,
};
use bitload::metrics::predicted_runtime;
use bitload::{AllocationResult64, Error};
use clap::{Args, Parser, Subcommand, ValueEnum};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_IO: u8 = 4;

const DEFAULT_SWEEP_N: &[usize] = &[128, 256, 512, 1024, 2048, 4096];
const DEFAULT_SWEEP_TAU_US: &[f64] = &[1.0, 2.5, 5.0, 10.0, 12.0, 15.0, 20.0, 25.0];

/// Bit-loading experiments over a simulated OFDMA downlink.
#[derive(Parser, Debug)]
#[command(name = "bitload", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every configured allocator at every sweep point.
    Run(Common),
    /// Sweep the subcarrier count (capacity, iterations and groups against N).
    SweepN(Common),
    /// Run the grouped allocator over a tau_max x G_T grid and report zeta.
    TradeoffGrid(Common),
    /// Grouping statistics only: group counts and in-group correlation.
    Groups(Common),
    /// Allocate one gain vector read from a file.
    AllocOnce(AllocOnce),
    /// Print the predicted running time and operation counts.
    PredictComplexity(Predict),
}

#[derive(Args, Debug)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Override a scenario key, e.g. --set trials=100. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    threads: Option<usize>,
    /// 500 trials and at most 1024 subcarriers.
    #[arg(long)]
    quick: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Full,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Algorithm {
    Eq,
    Wf,
    Hh,
    HhWf,
    HhK,
    HhGrp,
}

#[derive(Args, Debug)]
struct AllocOnce {
    /// Gain file: header `# gamma=<val> pmax=<val>`, then one gain per line.
    file: PathBuf,
    #[arg(long, value_enum, default_value_t = Algorithm::Hh)]
    algorithm: Algorithm,
    #[arg(long, default_value_t = 2)]
    kappa: usize,
    #[arg(long = "gt-db", default_value_t = 1.0)]
    gt_db: f64,
}

#[derive(Args, Debug)]
struct Predict {
    /// Subchannel counts.
    #[arg(default_values_t = [128usize, 256, 512, 1024, 2048, 4096])]
    n: Vec<usize>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::UnknownKey(_) => EXIT_USAGE,
            Error::Io { .. } => EXIT_IO,
            Error::Config(_) | Error::Parse { .. } | Error::InvalidParameter(_) => EXIT_CONFIG,
            _ => EXIT_FAILURE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run(c) => with_threads(&c, || {
            let s = build_scenario(&c, |_| {})?;
            let out = run_scenario_detailed(&s, matches!(c.format, Format::Full))?;
            finish(&c, out)
        }),
        Command::SweepN(c) => with_threads(&c, || {
            let s = build_scenario(&c, |f| {
                f.sweep_n.get_or_insert_with(|| DEFAULT_SWEEP_N.to_vec());
            })?;
            let out = run_scenario_detailed(&s, matches!(c.format, Format::Full))?;
            finish(&c, out)
        }),
        Command::TradeoffGrid(c) => with_threads(&c, || {
            let s = build_scenario(&c, default_tau_sweep)?;
            let grid = run_tradeoff_grid(&s)?;
            for (tau, gt) in grid.tau_max_s.iter().zip(grid.best_gt_per_tau()) {
                println!(
                    "tau_max={}us best_gt_db={}",
                    format_sig(tau * 1e6),
                    format_sig(gt)
                );
            }
            finish(
                &c,
                ScenarioOutput {
                    summaries: grid.summaries(),
                    records: Vec::new(),
                },
            )
        }),
        Command::Groups(c) => with_threads(&c, || {
            let s = build_scenario(&c, |_| {})?;
            let summaries = run_grouping_stats(&s)?;
            finish(
                &c,
                ScenarioOutput {
                    summaries,
                    records: Vec::new(),
                },
            )
        }),
        Command::AllocOnce(a) => alloc_once(&a),
        Command::PredictComplexity(p) => {
            predict(&p.n);
            Ok(())
        }
    }
}

fn default_tau_sweep(f: &mut bitload::harness::ScenarioFile) {
    f.sweep_tau_max_s
        .get_or_insert_with(|| DEFAULT_SWEEP_TAU_US.iter().map(|t| t * 1e-6).collect());
}

fn with_threads(
    c: &Common,
    job: impl FnOnce() -> Result<(), Failure> + Send,
) -> Result<(), Failure> {
    match c.threads {
        None => job(),
        Some(0) => Err(usage("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure {
                code: EXIT_FAILURE,
                message: e.to_string(),
            })?
            .install(job),
    }
}

fn build_scenario(
    c: &Common,
    defaults: impl FnOnce(&mut bitload::harness::ScenarioFile),
) -> Result<Scenario, Failure> {
    let overrides = c
        .overrides
        .iter()
        .map(|s| parse_override(s).map_err(|e| usage(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let mut file = load_scenario(c.scenario.as_deref(), &overrides)?;
    defaults(&mut file);
    let mut s = file.to_scenario()?;
    if let Some(seed) = c.seed {
        s.master_seed = seed;
    }
    if c.quick {
        s = s.quick();
    }
    if let Some(t) = c.trials {
        if t == 0 {
            return Err(Error::Config(vec!["trials must be at least 1".into()]).into());
        }
        s.trials = t;
    }
    Ok(s)
}

fn finish(c: &Common, out: ScenarioOutput) -> Result<(), Failure> {
    let format = match c.format {
        Format::Csv => OutputFormat::Csv,
        Format::Full => OutputFormat::Full,
    };
    let written = dump_results(&out, &c.out, format)?;
    print!("{}", format_table(&out.summaries));
    println!("wrote {} files to {}", written.len(), c.out.display());
    Ok(())
}

fn alloc_once(a: &AllocOnce) -> Result<(), Failure> {
    let gains = read_gain_file(&a.file)?;
    let r: AllocationResult64 = match a.algorithm {
        Algorithm::Eq => equal_power(&gains),
        Algorithm::Wf => waterfill(&gains),
        Algorithm::Hh => hh_allocate(&gains, None, 1, None)?,
        Algorithm::HhWf => hh_wf_allocate(&gains, 1, None)?,
        Algorithm::HhK => hh_allocate(&gains, None, a.kappa, None)?,
        Algorithm::HhGrp => hh_grp_allocate(&gains, a.gt_db, 1)?.result,
    };
    let bits: Vec<String> = r.bits.iter().map(u32::to_string).collect();
    let powers: Vec<String> = r.powers.iter().map(|&p| format_sig(p)).collect();
    println!("bits=[{}]", bits.join(", "));
    println!("powers=[{}]", powers.join(", "));
    println!("total_power={}", format_sig(r.total_power()));
    println!("capacity={}", format_sig(r.capacity()));
    println!("iterations={}", r.iterations);
    Ok(())
}

fn ledger_line(l: &OpLedger) -> String {
    format!(
        "add={} sub={} mult={} div={} exp={} log={}",
        l.additions,
        l.subtractions,
        l.multiplications,
        l.divisions,
        l.exponentiations,
        l.logarithms
    )
}

fn predict(ns: &[usize]) {
    for &n in ns {
        let p = ledger_predicted(n);
        println!("N={n} T_HH={}", format_sig(predicted_runtime(n)));
        println!("  setup:         {}", ledger_line(&p.setup));
        println!("  per iteration: {}", ledger_line(&p.per_iteration));
        println!(
            "  total ({} iterations): {}",
            p.iterations,
            ledger_line(&p.total())
        );
    }
}
