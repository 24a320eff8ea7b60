//! Command-line flags, `key=value` config files and the resolved run
//! configuration echoed into every manifest.
//!
//! Precedence: flag, then environment (worker count only), then config file,
//! then the subcommand default.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub const WORKERS_ENV: &str = "QWALK_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "qwalk",
    version,
    about = "Quantum and classical walk mixing experiments on periodic lattices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Cycle eigenvalues and the lattice spectral gap (--dims).
    Spectrum(#[command(flatten)] Flags),
    /// First column of the averaged kernel P_T (--dims, --T, --dt).
    Kernel(#[command(flatten)] Flags),
    /// Lazy classical walk: exact tv curve and coupling times (--dims, --epsilon, --T-max, --trajectories, --seed).
    MixClassical(#[command(flatten)] Flags),
    /// Coordinate-wise quantum walk (--dims, --epsilon, --times, --rounds).
    MixCoordinate(#[command(flatten)] Flags),
    /// Repeated-measurement walk (--dims, --T, --rounds, --mode, --trajectories, --seed).
    MixRepeated(#[command(flatten)] Flags),
    /// Integral of the single-cycle oscillating sum against 32 (n ln n)^2 (--n, --T, --offsets).
    Lemma2(#[command(flatten)] Flags),
    /// Product-integral sweep over odd coprime pairs (--range, --pairs, --seed, --T-max, --T-points, --dt, --offsets).
    Conjecture(#[command(flatten)] Flags),
    /// Entry-wise averaged-kernel bounds at T = 1600 (n1+n2)(ln n1)^2 (--dims, --relaxed). Slow tier.
    Theorem3(#[command(flatten)] Flags),
    /// Quantum vs classical time-averaged return probability (--dims, --T-max).
    Fig1(#[command(flatten)] Flags),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Kernel(_) => "kernel",
            Command::MixClassical(_) => "mix-classical",
            Command::MixCoordinate(_) => "mix-coordinate",
            Command::MixRepeated(_) => "mix-repeated",
            Command::Lemma2(_) => "lemma2",
            Command::Conjecture(_) => "conjecture",
            Command::Theorem3(_) => "theorem3",
            Command::Fig1(_) => "fig1",
        }
    }

    pub fn flags(&self) -> &Flags {
        match self {
            Command::Spectrum(f)
            | Command::Kernel(f)
            | Command::MixClassical(f)
            | Command::MixCoordinate(f)
            | Command::MixRepeated(f)
            | Command::Lemma2(f)
            | Command::Conjecture(f)
            | Command::Theorem3(f)
            | Command::Fig1(f) => f,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Fast,
    Slow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }

    fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            "svg" => Some(Format::Svg),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Sampled,
}

/// Every flag, shared by all subcommands; each subcommand reads the ones it
/// needs.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize)]
pub struct Flags {
    /// Cycle lengths, e.g. 19,5.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Single cycle length.
    #[arg(long)]
    pub n: Option<usize>,
    /// Averaging horizon T.
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub horizon: Option<f64>,
    /// Measurement rounds T'.
    #[arg(long)]
    pub rounds: Option<u32>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Quadrature step.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Offsets l = q - p, e.g. 0,1.
    #[arg(long, alias = "offset", value_delimiter = ',')]
    pub offsets: Option<Vec<usize>>,
    /// Pair range lo,hi.
    #[arg(long, value_delimiter = ',')]
    pub range: Option<Vec<usize>>,
    /// Number of pairs sampled from the range (all pairs when absent).
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long = "T-max")]
    #[serde(rename = "T-max")]
    pub t_max: Option<f64>,
    #[arg(long = "T-points")]
    #[serde(rename = "T-points")]
    pub t_points: Option<usize>,
    /// Per-coordinate evolution times.
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Monte Carlo trajectories or coupling trials.
    #[arg(long)]
    pub trajectories: Option<usize>,
    /// Report the long-horizon case bounds outside their hypotheses without asserting them.
    #[arg(long)]
    pub relaxed: bool,
    #[arg(long, value_enum)]
    pub tier: Option<Tier>,
    /// Worker threads (default: QWALK_WORKERS, then all cores).
    #[arg(long)]
    pub parallel: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// key=value file merged under the flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

/// Parses a `key=value` file; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line {}: expected key=value, got {raw:?}", i + 1))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn parse_one<T: FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: Display,
{
    v.parse::<T>()
        .map_err(|e| anyhow!("config key {key}: cannot parse {v:?}: {e}"))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>>
where
    T::Err: Display,
{
    v.split(',').map(|s| parse_one(key, s.trim())).collect()
}

fn parse_enum<T: ValueEnum>(key: &str, v: &str) -> Result<T> {
    T::from_str(v, true).map_err(|e| anyhow!("config key {key}: {e}"))
}

fn fill<T>(slot: &mut Option<T>, parsed: impl FnOnce() -> Result<T>) -> Result<()> {
    if slot.is_none() {
        *slot = Some(parsed()?);
    }
    Ok(())
}

impl Flags {
    /// Fills unset flags from config entries.
    pub fn merge_config(&mut self, cfg: &BTreeMap<String, String>) -> Result<()> {
        for (key, v) in cfg {
            let k = key.as_str();
            match k {
                "dims" => fill(&mut self.dims, || parse_list(k, v))?,
                "n" => fill(&mut self.n, || parse_one(k, v))?,
                "T" => fill(&mut self.horizon, || parse_one(k, v))?,
                "rounds" => fill(&mut self.rounds, || parse_one(k, v))?,
                "epsilon" => fill(&mut self.epsilon, || parse_one(k, v))?,
                "dt" => fill(&mut self.dt, || parse_one(k, v))?,
                "seed" => fill(&mut self.seed, || parse_one(k, v))?,
                "offsets" | "offset" => fill(&mut self.offsets, || parse_list(k, v))?,
                "range" => fill(&mut self.range, || parse_list(k, v))?,
                "pairs" => fill(&mut self.pairs, || parse_one(k, v))?,
                "T-max" => fill(&mut self.t_max, || parse_one(k, v))?,
                "T-points" => fill(&mut self.t_points, || parse_one(k, v))?,
                "times" => fill(&mut self.times, || parse_list(k, v))?,
                "mode" => fill(&mut self.mode, || parse_enum(k, v))?,
                "trajectories" => fill(&mut self.trajectories, || parse_one(k, v))?,
                "relaxed" => self.relaxed |= parse_one::<bool>(k, v)?,
                "tier" => fill(&mut self.tier, || parse_enum(k, v))?,
                "parallel" => fill(&mut self.parallel, || parse_one(k, v))?,
                "out" => fill(&mut self.out, || Ok(PathBuf::from(v)))?,
                "format" => fill(&mut self.format, || parse_enum(k, v))?,
                other => bail!("unknown config key {other:?}"),
            }
        }
        Ok(())
    }
}

/// Fully resolved configuration for one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    #[serde(flatten)]
    pub flags: Flags,
    /// 0 means one worker per core.
    pub workers: usize,
    #[serde(skip)]
    pub format: Format,
    #[serde(skip)]
    pub out: PathBuf,
}

impl RunConfig {
    pub fn dims(&self) -> &[usize] {
        self.flags.dims.as_deref().unwrap_or(&[])
    }
}

fn default_dims(cmd: &str) -> Vec<usize> {
    match cmd {
        "mix-classical" => vec![9, 5],
        "theorem3" => vec![95, 93],
        _ => vec![19, 5],
    }
}

/// Applies environment and subcommand defaults so that every value used by
/// the run appears in the manifest.
pub fn resolve(cmd: &Command, env_workers: Option<String>) -> Result<RunConfig> {
    let name = cmd.name();
    let mut f = cmd.flags().clone();
    if let Some(path) = &f.config {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        f.merge_config(&parse_config_file(&text)?)?;
    }
    let workers = match (f.parallel, env_workers) {
        (Some(w), _) => w,
        (None, Some(env)) => env
            .trim()
            .parse()
            .map_err(|e| anyhow!("{WORKERS_ENV}={env:?} is not a worker count: {e}"))?,
        (None, None) => 0,
    };
    f.parallel = None;

    match name {
        "spectrum" | "kernel" | "mix-classical" | "mix-coordinate" | "mix-repeated"
        | "theorem3" | "fig1" => {
            f.dims.get_or_insert_with(|| default_dims(name));
        }
        _ => {}
    }
    match name {
        "kernel" => {
            f.horizon.get_or_insert(24.0);
            f.dt.get_or_insert(0.02);
        }
        "mix-classical" => {
            f.epsilon.get_or_insert(0.1);
            f.trajectories.get_or_insert(10_000);
            f.seed.get_or_insert(0);
        }
        "mix-coordinate" => {
            f.epsilon.get_or_insert(0.1);
        }
        "mix-repeated" => {
            f.horizon.get_or_insert(24.0);
            f.rounds.get_or_insert(3);
            f.mode.get_or_insert(Mode::Exact);
            f.seed.get_or_insert(0);
            if f.mode == Some(Mode::Sampled) {
                f.trajectories.get_or_insert(100_000);
            }
        }
        "lemma2" => {
            f.n.get_or_insert(19);
            f.horizon.get_or_insert(100.0);
            f.offsets.get_or_insert_with(|| vec![0]);
        }
        "conjecture" => {
            f.range.get_or_insert_with(|| vec![10, 100]);
            f.t_max.get_or_insert(1e4);
            f.t_points.get_or_insert(20);
            f.dt.get_or_insert(0.02);
            f.offsets.get_or_insert_with(|| vec![0]);
            f.seed.get_or_insert(0);
        }
        "fig1" => {
            let d = f.dims.as_ref().expect("dims defaulted");
            let default_max = 4 * d.iter().sum::<usize>();
            f.t_max.get_or_insert(default_max as f64);
        }
        _ => {}
    }
    let tier = *f.tier.get_or_insert(Tier::Fast);
    let slow_job = name == "theorem3" || (name == "conjecture" && f.pairs.is_none());
    if slow_job && tier != Tier::Slow {
        let what = if name == "conjecture" {
            "the full conjecture sweep (no --pairs)"
        } else {
            name
        };
        bail!("{what} is a slow-tier job; pass --tier slow to run it");
    }

    let default_format = if name == "lemma2" {
        Format::Json
    } else {
        Format::Csv
    };
    let format = match (f.format, &f.out) {
        (Some(fmt), _) => fmt,
        (None, Some(p)) => Format::from_path(p).unwrap_or(default_format),
        (None, None) => default_format,
    };
    let out = f
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("results").join(format!("{name}.{}", format.extension())));
    f.format = Some(format);
    f.out = Some(out.clone());
    Ok(RunConfig {
        subcommand: name.to_string(),
        flags: f,
        workers,
        format,
        out,
    })
}
