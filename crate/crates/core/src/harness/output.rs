use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::run::ScenarioOutput;
use crate::metrics::MetricsSummary;
use crate::{Error, Result};

pub const CSV_COLUMNS: [&str; 13] = [
    "scenario_id",
    "algorithm",
    "param",
    "n_subcarriers",
    "tau_max_us",
    "trials",
    "avg_capacity_bps_hz",
    "std_capacity",
    "avg_iterations",
    "std_iterations",
    "avg_groups",
    "avg_group_corr",
    "zeta",
];

/// What [`dump_results`] writes besides `results.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    /// `results.csv` and plot data.
    #[default]
    Csv,
    /// Also `full.json` with every per-trial record.
    Full,
}

/// Six significant digits, `%g` style: fixed notation for exponents in
/// `[-4, 6)`, scientific otherwise, trailing zeros dropped.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_sig).unwrap_or_default()
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            what: path.display().to_string(),
            message: format!("{other:?}"),
        },
    }
}

fn row(m: &MetricsSummary) -> [String; 13] {
    [
        m.scenario_id.clone(),
        m.algorithm.clone(),
        m.param.clone(),
        m.n_subcarriers.to_string(),
        format_sig(m.tau_max_us),
        m.trials.to_string(),
        opt(m.avg_capacity),
        opt(m.std_capacity),
        opt(m.avg_iterations),
        opt(m.std_iterations),
        opt(m.avg_groups),
        opt(m.avg_group_correlation),
        opt(m.zeta),
    ]
}

/// Writes the summary table as CSV. An empty list gives a header-only file.
pub fn write_csv(summaries: &[MetricsSummary], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(CSV_COLUMNS).map_err(|e| csv_err(path, e))?;
    for m in summaries {
        w.write_record(row(m)).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// The summary table as CSV text.
pub fn csv_string(summaries: &[MetricsSummary]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for m in summaries {
        w.write_record(row(m)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn write_json<S: Serialize>(value: &S, path: &Path) -> Result<()> {
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer(std::io::BufWriter::new(f), value).map_err(|e| Error::Parse {
        what: path.display().to_string(),
        message: e.to_string(),
    })
}

fn file_part(s: &str) -> String {
    if s.is_empty() {
        return "base".into();
    }
    s.chars()
        .filter(|&c| c != '=')
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

type Metric = (&'static str, fn(&MetricsSummary) -> Option<f64>);

const METRICS: [Metric; 4] = [
    ("capacity", |m| m.avg_capacity),
    ("iterations", |m| m.avg_iterations),
    ("groups", |m| m.avg_groups),
    ("correlation", |m| m.avg_group_correlation),
];

/// Plot-ready series, one `x y` pair per line. Keys are file names of the
/// form `<figure-tag>_<algorithm>_<param>.dat`.
pub fn plot_series(summaries: &[MetricsSummary]) -> BTreeMap<String, Vec<(f64, f64)>> {
    let mut ns: Vec<usize> = summaries.iter().map(|m| m.n_subcarriers).collect();
    ns.sort_unstable();
    ns.dedup();
    let mut taus: Vec<f64> = summaries.iter().map(|m| m.tau_max_us).collect();
    taus.sort_by(f64::total_cmp);
    taus.dedup();

    let mut out: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for m in summaries {
        let series = format!("{}_{}", file_part(&m.algorithm), file_part(&m.param));
        for (name, get) in METRICS {
            let Some(y) = get(m) else { continue };
            if ns.len() > 1 {
                let mut tag = format!("{name}_vs_n");
                if taus.len() > 1 {
                    tag.push_str(&format!("_tau{}us", format_sig(m.tau_max_us)));
                }
                out.entry(format!("{tag}_{series}.dat"))
                    .or_default()
                    .push((m.n_subcarriers as f64, y));
            }
            if taus.len() > 1 {
                let mut tag = format!("{name}_vs_tau");
                if ns.len() > 1 {
                    tag.push_str(&format!("_n{}", m.n_subcarriers));
                }
                out.entry(format!("{tag}_{series}.dat"))
                    .or_default()
                    .push((m.tau_max_us, y));
            }
        }
        if let (Some(z), Some(gt)) = (m.zeta, param_value(&m.param)) {
            let tag = format!("zeta_vs_gt_tau{}us", format_sig(m.tau_max_us));
            out.entry(format!("{tag}_{}.dat", file_part(&m.algorithm)))
                .or_default()
                .push((gt, z));
        }
    }
    for v in out.values_mut() {
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    out
}

fn param_value(p: &str) -> Option<f64> {
    p.split_once('=')?.1.parse().ok()
}

/// Writes [`plot_series`] into `dir` and returns the paths written.
pub fn write_plot_data(summaries: &[MetricsSummary], dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (name, points) in plot_series(summaries) {
        let path = dir.join(name);
        let mut text = String::from("# x y\n");
        for (x, y) in points {
            let _ = writeln!(text, "{} {}", format_sig(x), format_sig(y));
        }
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// Writes `results.csv`, the plot data and, for [`OutputFormat::Full`],
/// `full.json` into `dir` (created if missing). Returns every path written.
pub fn dump_results(
    output: &ScenarioOutput,
    dir: &Path,
    format: OutputFormat,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv_path = dir.join("results.csv");
    write_csv(&output.summaries, &csv_path)?;
    let mut written = vec![csv_path];
    written.extend(write_plot_data(&output.summaries, dir)?);
    if format == OutputFormat::Full {
        let p = dir.join("full.json");
        write_json(output, &p)?;
        written.push(p);
    }
    Ok(written)
}

/// Fixed-width text table of the summaries for terminal output.
pub fn format_table(summaries: &[MetricsSummary]) -> String {
    let dash = |x: Option<f64>, prec: usize| {
        x.map(|v| format!("{v:.prec$}"))
            .unwrap_or_else(|| "-".into())
    };
    let mut s = format!(
        "{:<18} {:<8} {:<12} {:>12} {:>12} {:>10} {:>8}\n",
        "scenario", "alg", "param", "C [b/s/Hz]", "iterations", "groups", "zeta"
    );
    for m in summaries {
        let _ = writeln!(
            s,
            "{:<18} {:<8} {:<12} {:>12} {:>12} {:>10} {:>8}",
            m.scenario_id,
            m.algorithm,
            m.param,
            dash(m.avg_capacity, 4),
            dash(m.avg_iterations, 1),
            dash(m.avg_groups, 1),
            dash(m.zeta, 3),
        );
    }
    s
}
