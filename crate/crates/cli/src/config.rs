//! Run configuration: command-line flags layered over an optional
//! `key=value` file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use rmbec::codes::CodeFamily;
use rmbec::exit::{uniform_grid, validate_grid};
use rmbec::{Focus, LinearCode, RmParams};
use serde::Serialize;

use crate::CliError;

pub const DEFAULT_GRID: &str = "0:1:33";
pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_DELTA: f64 = 0.1;
pub const DEFAULT_QUADS: usize = 1000;
pub const DEFAULT_OUT: &str = "rmbec-out";

/// Flags shared by every verb. All are optional so that a config file can
/// supply them; a flag given on the command line always wins.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Code spec `rm:n,r` or path to a generator matrix file (repeatable).
    #[arg(long = "code", value_name = "SPEC")]
    pub code: Vec<String>,
    /// Erasure probability grid `lo:hi:steps` [default: 0:1:33].
    #[arg(long, value_name = "LO:HI:STEPS")]
    pub eps_grid: Option<String>,
    /// Monte Carlo trials per grid point [default: 10000].
    #[arg(long)]
    pub trials: Option<u64>,
    /// Base seed for all random streams [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Threshold level(s) δ, comma separated [default: 0.1].
    #[arg(long, value_delimiter = ',')]
    pub delta: Vec<f64>,
    /// Use exact enumeration instead of Monte Carlo (N ≤ 16).
    #[arg(long)]
    pub exact: bool,
    /// Size of the worker pool [default: 1].
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory [default: rmbec-out].
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Plain-text `key=value` run file; flags override its entries.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Random quadruples for 2-transitivity checks [default: 1000].
    #[arg(long)]
    pub quads: Option<usize>,
    /// Bit index to track, or `average` [default: bit 0 for RM codes,
    /// average otherwise].
    #[arg(long)]
    pub focus: Option<String>,
}

/// Fully resolved configuration. Everything except the output directory and
/// worker count is echoed into the manifest, so identical configs produce
/// identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub codes: Vec<String>,
    pub eps_grid: String,
    #[serde(skip)]
    pub grid: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub deltas: Vec<f64>,
    pub exact: bool,
    pub quads: usize,
    pub focus: Option<String>,
    #[serde(skip)]
    pub workers: usize,
    #[serde(skip)]
    pub out: PathBuf,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses a `key=value` file. `code` may repeat; `#` starts a comment line.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, Vec<String>>, CliError> {
    let mut map: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key=value", no + 1)))?;
        let key = k.trim().replace('_', "-");
        const KNOWN: [&str; 10] = ["code", "eps-grid", "trials", "seed", "delta", "exact", "workers", "out", "quads", "focus"];
        if !KNOWN.contains(&key.as_str()) {
            return Err(usage(format!("config line {}: unknown key {key:?}", no + 1)));
        }
        map.entry(key).or_default().push(v.trim().to_string());
    }
    Ok(map)
}

fn last<'a>(map: &'a BTreeMap<String, Vec<String>>, key: &str) -> Option<&'a str> {
    map.get(key).and_then(|v| v.last()).map(String::as_str)
}

fn parse_value<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    raw.parse()
        .map_err(|e| usage(format!("bad value {raw:?} for {key}: {e}")))
}

/// Parses `lo:hi:steps` into a validated grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, steps] = parts[..] else {
        return Err(usage(format!("grid {spec:?} is not of the form lo:hi:steps")));
    };
    let lo: f64 = parse_value("eps-grid", lo)?;
    let hi: f64 = parse_value("eps-grid", hi)?;
    let steps: usize = parse_value("eps-grid", steps)?;
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) {
        return Err(usage(format!("grid {spec:?} leaves [0, 1]")));
    }
    if steps == 0 || (steps > 1 && lo >= hi) {
        return Err(usage(format!("grid {spec:?} is empty or reversed")));
    }
    let grid = uniform_grid(lo, hi, steps);
    validate_grid(&grid).map_err(|e| usage(e.to_string()))?;
    Ok(grid)
}

impl RunConfig {
    pub fn resolve(args: &RunArgs, positional: &[String]) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
                parse_config_text(&text)?
            }
            None => BTreeMap::new(),
        };
        let mut codes: Vec<String> = positional.iter().chain(&args.code).cloned().collect();
        if codes.is_empty() {
            codes = file.get("code").cloned().unwrap_or_default();
        }
        let eps_grid = args
            .eps_grid
            .clone()
            .or_else(|| last(&file, "eps-grid").map(str::to_string))
            .unwrap_or_else(|| DEFAULT_GRID.to_string());
        let grid = parse_grid(&eps_grid)?;
        let trials = match args.trials {
            Some(t) => t,
            None => last(&file, "trials").map(|v| parse_value("trials", v)).transpose()?.unwrap_or(DEFAULT_TRIALS),
        };
        if trials == 0 {
            return Err(usage("trials must be at least 1"));
        }
        let seed = match args.seed {
            Some(s) => s,
            None => last(&file, "seed").map(|v| parse_value("seed", v)).transpose()?.unwrap_or(0),
        };
        let deltas = if !args.delta.is_empty() {
            args.delta.clone()
        } else if let Some(raw) = last(&file, "delta") {
            raw.split(',').map(|d| parse_value("delta", d.trim())).collect::<Result<_, _>>()?
        } else {
            vec![DEFAULT_DELTA]
        };
        if let Some(d) = deltas.iter().find(|&&d| !(d > 0.0 && d < 0.5)) {
            return Err(usage(format!("delta {d} is not in (0, 1/2)")));
        }
        let exact = args.exact || last(&file, "exact").map(|v| parse_value("exact", v)).transpose()?.unwrap_or(false);
        let workers = match args.workers {
            Some(w) => w,
            None => last(&file, "workers").map(|v| parse_value("workers", v)).transpose()?.unwrap_or(1),
        };
        if workers == 0 {
            return Err(usage("workers must be at least 1"));
        }
        let quads = match args.quads {
            Some(q) => q,
            None => last(&file, "quads").map(|v| parse_value("quads", v)).transpose()?.unwrap_or(DEFAULT_QUADS),
        };
        let out = args
            .out
            .clone()
            .or_else(|| last(&file, "out").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        let focus = args.focus.clone().or_else(|| last(&file, "focus").map(str::to_string));
        Ok(RunConfig {
            codes,
            eps_grid,
            grid,
            trials,
            seed,
            deltas,
            exact,
            quads,
            focus,
            workers,
            out,
        })
    }

    pub fn focus_for(&self, code: &LinearCode) -> Result<Focus, CliError> {
        match self.focus.as_deref() {
            None => Ok(Focus::average_for(code)),
            Some("average") => Ok(Focus::Average),
            Some(raw) => {
                let i: usize = parse_value("focus", raw)?;
                if i >= code.len() {
                    return Err(usage(format!("focus bit {i} out of range for length {}", code.len())));
                }
                Ok(Focus::Bit(i))
            }
        }
    }
}

/// Loads `rm:n,r` or a generator matrix file.
pub fn load_code(spec: &str) -> Result<LinearCode, CliError> {
    if spec.trim_start().starts_with("rm:") {
        let params: RmParams = spec.parse().map_err(|e: rmbec::Error| usage(e.to_string()))?;
        return rmbec::rm_generator(params).map_err(CliError::from);
    }
    let path = Path::new(spec);
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("{spec:?} is neither rm:n,r nor a readable file: {e}")))?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| spec.to_string());
    LinearCode::from_generator_text(&text, label).map_err(|e| usage(e.to_string()))
}

pub fn rm_params(code: &LinearCode) -> Option<RmParams> {
    match code.family() {
        CodeFamily::ReedMuller(p) => Some(p),
        CodeFamily::General => None,
    }
}

/// File-name-safe form of a code label.
pub fn slug(label: &str) -> String {
    let s: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect();
    s.trim_matches('_').to_string()
}
