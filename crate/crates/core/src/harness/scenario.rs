use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::alloc::snr_gap_from_ber;
use crate::channel::{thermal_noise_density, SystemParams};
use crate::{Error, Result};

/// Keys accepted in a scenario file and by `--set`.
pub const SCENARIO_KEYS: &[&str] = &[
    "n_subcarriers",
    "n_users",
    "bandwidth_hz",
    "pmax_w",
    "ber",
    "gamma",
    "pathloss_exp",
    "cell_radius_m",
    "noise_density_w_hz",
    "tau_max_s",
    "n_taps",
    "trials",
    "seed",
    "algorithms",
    "kappa_list",
    "gt_db_list",
    "sweep_n",
    "sweep_tau_max_s",
];

/// One allocator configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AllocatorSpec {
    Eq,
    Wf,
    Hh,
    HhWf,
    HhK(usize),
    HhGrp(f64),
}

impl AllocatorSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AllocatorSpec::Eq => "EQ",
            AllocatorSpec::Wf => "WF",
            AllocatorSpec::Hh => "HH",
            AllocatorSpec::HhWf => "HH-WF",
            AllocatorSpec::HhK(_) => "HH-K",
            AllocatorSpec::HhGrp(_) => "HH-GRP",
        }
    }

    pub fn param(&self) -> String {
        match self {
            AllocatorSpec::HhK(k) => format!("kappa={k}"),
            AllocatorSpec::HhGrp(gt) => format!("gt_db={gt}"),
            _ => String::new(),
        }
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self, AllocatorSpec::Eq | AllocatorSpec::Wf)
    }
}

impl fmt::Display for AllocatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.param().as_str() {
            "" => f.write_str(self.name()),
            p => write!(f, "{}({p})", self.name()),
        }
    }
}

/// Where the SNR gap comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GammaSpec {
    Explicit(f64),
    Ber(f64),
}

impl GammaSpec {
    pub fn resolve(&self) -> Result<f64> {
        match *self {
            GammaSpec::Explicit(g) => Ok(g),
            GammaSpec::Ber(ber) => snr_gap_from_ber(ber),
        }
    }
}

/// Optional sweep axes; an absent axis means "the base value only".
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub n_subcarriers: Option<Vec<usize>>,
    pub tau_max_s: Option<Vec<f64>>,
}

/// A validated experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub system: SystemParams<f64>,
    pub pmax_w: f64,
    pub gamma: GammaSpec,
    pub allocators: Vec<AllocatorSpec>,
    pub trials: usize,
    pub master_seed: u64,
    pub sweep: Sweep,
    /// Thresholds used by the grouping statistics and the tradeoff grid.
    pub gt_db_list: Vec<f64>,
}

/// Scenario file contents. Every key is optional and falls back to the
/// reference cell configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub n_subcarriers: Option<usize>,
    pub n_users: Option<usize>,
    pub bandwidth_hz: Option<f64>,
    pub pmax_w: Option<f64>,
    pub ber: Option<f64>,
    pub gamma: Option<f64>,
    pub pathloss_exp: Option<f64>,
    pub cell_radius_m: Option<f64>,
    pub noise_density_w_hz: Option<f64>,
    pub tau_max_s: Option<f64>,
    pub n_taps: Option<usize>,
    pub trials: Option<usize>,
    /// Master seed; TOML integers limit it to `0..2^63`.
    pub seed: Option<u64>,
    pub algorithms: Option<Vec<String>>,
    pub kappa_list: Option<Vec<usize>>,
    pub gt_db_list: Option<Vec<f64>>,
    pub sweep_n: Option<Vec<usize>>,
    pub sweep_tau_max_s: Option<Vec<f64>>,
}

pub const DEFAULT_PMAX_W: f64 = 10.0;
pub const DEFAULT_BER: f64 = 1e-12;
pub const DEFAULT_TRIALS: usize = 10_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_KAPPAS: &[usize] = &[2, 4, 8, 16];
pub const DEFAULT_GT_DB: &[f64] = &[0.25, 0.5, 1.0, 5.0];
pub const ALGORITHM_NAMES: &[&str] = &["EQ", "WF", "HH", "HH-WF", "HH-K", "HH-GRP"];

impl ScenarioFile {
    /// Parses TOML text, rejecting unknown keys.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table = parse_table(text, "scenario")?;
        Self::from_table(table)
    }

    fn from_table(table: toml::Table) -> Result<Self> {
        if let Some(k) = table.keys().find(|k| !SCENARIO_KEYS.contains(&k.as_str())) {
            return Err(Error::UnknownKey(k.clone()));
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Parse {
                what: "scenario".into(),
                message: e.message().to_string(),
            })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario file serializes")
    }

    /// Checks every field and builds the scenario, listing all violations.
    pub fn to_scenario(&self) -> Result<Scenario> {
        let mut bad = Vec::new();
        let defaults = SystemParams::<f64>::default();

        let system = SystemParams {
            n_subcarriers: self.n_subcarriers.unwrap_or(defaults.n_subcarriers),
            n_users: self.n_users.unwrap_or(defaults.n_users),
            total_bandwidth_hz: self.bandwidth_hz.unwrap_or(defaults.total_bandwidth_hz),
            noise_density_w_hz: self.noise_density_w_hz.unwrap_or(thermal_noise_density()),
            cell_radius_m: self.cell_radius_m.unwrap_or(defaults.cell_radius_m),
            pathloss_exponent: self.pathloss_exp.unwrap_or(defaults.pathloss_exponent),
            tau_max_s: self.tau_max_s.unwrap_or(defaults.tau_max_s),
            num_taps: self.n_taps.unwrap_or(defaults.num_taps),
            ..defaults
        };
        bad.extend(system.violations());

        let pmax_w = self.pmax_w.unwrap_or(DEFAULT_PMAX_W);
        if !(pmax_w > 0.0 && pmax_w.is_finite()) {
            bad.push(format!("pmax_w must be positive, got {pmax_w}"));
        }

        let gamma = match (self.gamma, self.ber) {
            (Some(g), _) => {
                if !(g >= 1.0 && g.is_finite()) {
                    bad.push(format!("gamma must be >= 1, got {g}"));
                }
                GammaSpec::Explicit(g)
            }
            (None, ber) => {
                let ber = ber.unwrap_or(DEFAULT_BER);
                if !(ber > 0.0 && ber < 1.0) {
                    bad.push(format!("ber must lie in (0, 1), got {ber}"));
                }
                GammaSpec::Ber(ber)
            }
        };

        let trials = self.trials.unwrap_or(DEFAULT_TRIALS);
        if trials == 0 {
            bad.push("trials must be at least 1".into());
        }

        let kappas = self
            .kappa_list
            .clone()
            .unwrap_or_else(|| DEFAULT_KAPPAS.to_vec());
        if let Some(k) = kappas.iter().find(|&&k| k < 2) {
            bad.push(format!("kappa_list values must be >= 2, got {k}"));
        }
        let gts = self
            .gt_db_list
            .clone()
            .unwrap_or_else(|| DEFAULT_GT_DB.to_vec());
        if let Some(g) = gts.iter().find(|&&g| !(g > 0.0 && g.is_finite())) {
            bad.push(format!("gt_db_list values must be positive, got {g}"));
        }

        let names = self
            .algorithms
            .clone()
            .unwrap_or_else(|| ALGORITHM_NAMES.iter().map(|s| s.to_string()).collect());
        if names.is_empty() {
            bad.push("algorithms must not be empty".into());
        }
        let mut allocators = Vec::new();
        for name in &names {
            match name.to_ascii_uppercase().as_str() {
                "EQ" => allocators.push(AllocatorSpec::Eq),
                "WF" => allocators.push(AllocatorSpec::Wf),
                "HH" => allocators.push(AllocatorSpec::Hh),
                "HH-WF" => allocators.push(AllocatorSpec::HhWf),
                "HH-K" => {
                    if kappas.is_empty() {
                        bad.push("HH-K needs a non-empty kappa_list".into());
                    }
                    allocators.extend(kappas.iter().map(|&k| AllocatorSpec::HhK(k)));
                }
                "HH-GRP" => {
                    if gts.is_empty() {
                        bad.push("HH-GRP needs a non-empty gt_db_list".into());
                    }
                    allocators.extend(gts.iter().map(|&g| AllocatorSpec::HhGrp(g)));
                }
                other => bad.push(format!(
                    "unknown algorithm `{other}` (expected one of {})",
                    ALGORITHM_NAMES.join(", ")
                )),
            }
        }

        if let Some(ns) = &self.sweep_n {
            if ns.is_empty() {
                bad.push("sweep_n must not be empty".into());
            }
            for &n in ns {
                if system.n_users == 0 || n < system.n_users || n % system.n_users != 0 {
                    bad.push(format!(
                        "sweep_n value {n} is not a positive multiple of n_users ({})",
                        system.n_users
                    ));
                }
            }
        }
        if let Some(ts) = &self.sweep_tau_max_s {
            if ts.is_empty() {
                bad.push("sweep_tau_max_s must not be empty".into());
            }
            if let Some(t) = ts.iter().find(|&&t| !(t > 0.0 && t.is_finite())) {
                bad.push(format!("sweep_tau_max_s values must be positive, got {t}"));
            }
        }

        if !bad.is_empty() {
            return Err(Error::Config(bad));
        }
        Ok(Scenario {
            system,
            pmax_w,
            gamma,
            allocators,
            trials,
            master_seed: self.seed.unwrap_or(DEFAULT_SEED),
            sweep: Sweep {
                n_subcarriers: self.sweep_n.clone(),
                tau_max_s: self.sweep_tau_max_s.clone(),
            },
            gt_db_list: gts,
        })
    }
}

fn parse_table(text: &str, what: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>().map_err(|e| Error::Parse {
        what: what.to_string(),
        message: e.message().to_string(),
    })
}

/// Applies `key=value` overrides to scenario text. Values use TOML syntax;
/// anything that does not parse as a TOML value is taken as a bare string.
pub fn apply_overrides(text: &str, overrides: &[(String, String)]) -> Result<ScenarioFile> {
    let mut table = parse_table(text, "scenario")?;
    for (key, raw) in overrides {
        if !SCENARIO_KEYS.contains(&key.as_str()) {
            return Err(Error::UnknownKey(key.clone()));
        }
        let value = match format!("v = {raw}").parse::<toml::Table>() {
            Ok(mut t) => t.remove("v").expect("key present"),
            Err(_) => toml::Value::String(raw.clone()),
        };
        table.insert(key.clone(), value);
    }
    ScenarioFile::from_table(table)
}

/// Splits `key=value`.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(Error::Parse {
            what: "override".into(),
            message: format!("expected key=value, got `{s}`"),
        }),
    }
}

/// Reads a scenario file (or starts from defaults when `path` is `None`) and
/// applies the overrides.
pub fn load_scenario(path: Option<&Path>, overrides: &[(String, String)]) -> Result<ScenarioFile> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?,
        None => String::new(),
    };
    apply_overrides(&text, overrides)
}

impl Scenario {
    /// The reference cell configuration.
    pub fn reference() -> Self {
        ScenarioFile::default()
            .to_scenario()
            .expect("defaults are valid")
    }

    /// Desk-scale profile: 500 trials and no more than 1024 subcarriers.
    pub fn quick(mut self) -> Self {
        self.trials = 500;
        if self.system.n_subcarriers > 1024 {
            self.system.n_subcarriers = 1024;
        }
        if let Some(ns) = &mut self.sweep.n_subcarriers {
            ns.retain(|&n| n <= 1024);
            if ns.is_empty() {
                ns.push(self.system.n_subcarriers);
            }
        }
        self
    }

    /// Sweep points as `(n_subcarriers, tau_max_s)`, N-major.
    pub fn sweep_points(&self) -> Vec<(usize, f64)> {
        let ns = self
            .sweep
            .n_subcarriers
            .clone()
            .unwrap_or_else(|| vec![self.system.n_subcarriers]);
        let ts = self
            .sweep
            .tau_max_s
            .clone()
            .unwrap_or_else(|| vec![self.system.tau_max_s]);
        ns.iter()
            .flat_map(|&n| ts.iter().map(move |&t| (n, t)))
            .collect()
    }
}
