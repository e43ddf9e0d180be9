//! Command-line flags, JSON config files with the same keys, and the
//! fully resolved configuration embedded in every report.

use std::path::{Path, PathBuf};

use clap::{Args, Parser};
use gauge_lab::{Dyadic, Error, Result};
use serde::{Deserialize, Serialize};

pub const COMMANDS: [&str; 10] = [
    "integrate",
    "pettis",
    "series",
    "abscont",
    "lln",
    "bochner",
    "stability",
    "vitali",
    "gallery",
    "report",
];

/// Commands whose results are Monte Carlo estimates; they need a seed from
/// `--seed`, the config file, or `GIL_SEED`.
pub const NEEDS_SEED: [&str; 2] = ["lln", "stability"];

#[derive(Parser, Debug)]
#[command(
    name = "gauge-lab",
    version,
    about = "Gauge, Pettis, empirical-mean and Bochner integration experiments"
)]
pub struct Cli {
    #[arg(value_parser = COMMANDS)]
    pub command: String,
    /// Gallery example (3e | 3f | 3g), or the report file for `report`.
    pub target: Option<String>,
    #[command(flatten)]
    pub params: Params,
    /// JSON file with the same keys as the flags; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory for the JSON report and CSV tables (stdout otherwise).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Omit the timestamp so identical runs give identical bytes.
    #[arg(long)]
    pub deterministic: bool,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Integrand: 3g | 3f | 3e | identity | poly:c0,c1,… | counter:k
    #[arg(long = "fn")]
    #[serde(rename = "fn", default)]
    pub fn_name: Option<String>,
    /// Number of sequence coordinates.
    #[arg(long = "R")]
    #[serde(rename = "R", default)]
    pub r_len: Option<usize>,
    /// Number of fat-set stages.
    #[arg(long = "L")]
    #[serde(rename = "L", default)]
    pub levels: Option<u32>,
    /// Fat-set resolution r.
    #[arg(long)]
    #[serde(default)]
    pub resolution: Option<u32>,
    /// Tolerance, e.g. 2^-12 or 1/2^12.
    #[arg(long)]
    #[serde(default)]
    pub tol: Option<String>,
    #[arg(long)]
    #[serde(default)]
    pub seed: Option<u64>,
    /// const:<q> | pw:<v0>,<b1>,<v1>,…
    #[arg(long)]
    #[serde(default)]
    pub gauge: Option<String>,
    /// auto | uniform
    #[arg(long)]
    #[serde(default)]
    pub schedule: Option<String>,
    #[arg(long = "max-level")]
    #[serde(rename = "max-level", default)]
    pub max_level: Option<u32>,
    /// Grid depth of the step-function space.
    #[arg(long)]
    #[serde(default)]
    pub grid: Option<u32>,
    /// Grid depth for jump points of family members.
    #[arg(long = "jump-depth")]
    #[serde(rename = "jump-depth", default)]
    pub jump_depth: Option<u32>,
    /// Sample count per batch, blocks, or sequence index depending on the command.
    #[arg(long)]
    #[serde(default)]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    pub batches: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    pub samples: Option<u64>,
    /// Bochner approximation target.
    #[arg(long)]
    #[serde(default)]
    pub eps: Option<String>,
    #[arg(long)]
    #[serde(default)]
    pub pieces: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    pub functionals: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    pub regions: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    pub alpha: Option<f64>,
    #[arg(long)]
    #[serde(default)]
    pub beta: Option<f64>,
    #[arg(long)]
    #[serde(default)]
    pub m: Option<usize>,
    #[arg(long = "mn-max")]
    #[serde(rename = "mn-max", default)]
    pub mn_max: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    pub margin: Option<f64>,
    #[arg(long)]
    #[serde(default)]
    pub attempts: Option<usize>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
    };
}

impl Params {
    /// `self` with every field set in `top` replaced.
    pub fn overlay(mut self, top: &Params) -> Params {
        overlay!(
            self,
            top,
            fn_name,
            r_len,
            levels,
            resolution,
            tol,
            seed,
            gauge,
            schedule,
            max_level,
            grid,
            jump_depth,
            n,
            batches,
            samples,
            eps,
            pieces,
            functionals,
            regions,
            alpha,
            beta,
            m,
            mn_max,
            margin,
            attempts
        );
        self
    }

    pub fn from_file(path: &Path) -> Result<Params> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidParameter(format!("cannot read config {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("config {}: {e}", path.display())))
    }
}

/// Every parameter with its default filled in.
#[derive(Clone, Debug, Serialize)]
pub struct Resolved {
    pub command: String,
    pub target: Option<String>,
    #[serde(rename = "fn")]
    pub fn_name: String,
    #[serde(rename = "R")]
    pub r_len: usize,
    #[serde(rename = "L")]
    pub levels: u32,
    pub resolution: u32,
    pub tol: Dyadic,
    pub seed: u64,
    pub gauge: Option<String>,
    pub schedule: String,
    #[serde(rename = "max-level")]
    pub max_level: u32,
    pub grid: u32,
    #[serde(rename = "jump-depth")]
    pub jump_depth: u32,
    pub n: Option<usize>,
    pub batches: usize,
    pub samples: u64,
    pub eps: Dyadic,
    pub pieces: usize,
    pub functionals: usize,
    pub regions: usize,
    pub alpha: f64,
    pub beta: f64,
    pub m: usize,
    #[serde(rename = "mn-max")]
    pub mn_max: usize,
    pub margin: f64,
    pub attempts: usize,
    pub deterministic: bool,
    pub threads: Option<usize>,
}

fn in_range<T: PartialOrd + std::fmt::Display>(name: &str, v: T, lo: T, hi: T) -> Result<T> {
    if v < lo || v > hi {
        return Err(Error::InvalidParameter(format!(
            "{name} = {v} outside [{lo}, {hi}]"
        )));
    }
    Ok(v)
}

fn positive_dyadic(name: &str, s: &str) -> Result<Dyadic> {
    let d: Dyadic = s.parse()?;
    if !d.is_positive() || d > Dyadic::one() {
        return Err(Error::InvalidParameter(format!(
            "{name} must lie in (0, 1], got {s}"
        )));
    }
    Ok(d)
}

fn default_fn(command: &str, target: Option<&str>) -> &'static str {
    match (command, target) {
        ("gallery", Some("3e")) => "3e",
        ("gallery", Some("3f")) => "3f",
        ("vitali", _) | ("series", _) | ("integrate", _) | ("lln", _) => "3g",
        ("stability", _) => "identity",
        ("bochner", _) => "3f",
        _ => "3g",
    }
}

impl Resolved {
    pub fn new(
        command: &str,
        target: Option<String>,
        p: &Params,
        env_seed: Option<u64>,
        deterministic: bool,
        threads: Option<usize>,
    ) -> Result<Resolved> {
        let seed = match p.seed.or(env_seed) {
            Some(s) => s,
            None if NEEDS_SEED.contains(&command) => {
                return Err(Error::InvalidParameter(format!(
                    "`{command}` needs --seed (or GIL_SEED)"
                )))
            }
            None => 0,
        };
        if command == "gallery" && !matches!(target.as_deref(), Some("3e" | "3f" | "3g")) {
            return Err(Error::InvalidParameter(
                "gallery needs one of 3e | 3f | 3g".into(),
            ));
        }
        if command == "report" && target.is_none() {
            return Err(Error::InvalidParameter("report needs a report file".into()));
        }
        let tol = positive_dyadic("tol", p.tol.as_deref().unwrap_or("2^-10"))?;
        let eps = match &p.eps {
            Some(e) => positive_dyadic("eps", e)?,
            None => tol.clone(),
        };
        let schedule = p.schedule.clone().unwrap_or_else(|| "auto".into());
        if !matches!(schedule.as_str(), "auto" | "uniform") {
            return Err(Error::InvalidParameter(format!(
                "schedule must be auto | uniform, got {schedule}"
            )));
        }
        let alpha = p.alpha.unwrap_or(0.3);
        let beta = p.beta.unwrap_or(0.7);
        if alpha >= beta || alpha.is_nan() || beta.is_nan() {
            return Err(Error::InvalidParameter("need alpha < beta".into()));
        }
        let default_r = if target.as_deref() == Some("3e") {
            64
        } else {
            8
        };
        Ok(Resolved {
            command: command.into(),
            fn_name: p
                .fn_name
                .clone()
                .unwrap_or_else(|| default_fn(command, target.as_deref()).into()),
            target,
            r_len: in_range("R", p.r_len.unwrap_or(default_r), 1, 1000)?,
            levels: in_range("L", p.levels.unwrap_or(4), 1, 8)?,
            resolution: in_range("resolution", p.resolution.unwrap_or(4), 2, 8)?,
            tol,
            seed,
            gauge: p.gauge.clone(),
            schedule,
            max_level: in_range("max-level", p.max_level.unwrap_or(18), 1, 30)?,
            grid: in_range(
                "grid",
                p.grid.unwrap_or(gauge_lab::gallery::DEFAULT_SEGMENT_GRID),
                1,
                16,
            )?,
            jump_depth: in_range("jump-depth", p.jump_depth.unwrap_or(10), 2, 16)?,
            n: p.n,
            batches: in_range("batches", p.batches.unwrap_or(100), 1, 100_000)?,
            samples: in_range("samples", p.samples.unwrap_or(100_000), 100, 100_000_000)?,
            eps,
            pieces: in_range("pieces", p.pieces.unwrap_or(64), 1, 1 << 20)?,
            functionals: in_range("functionals", p.functionals.unwrap_or(20), 1, 10_000)?,
            regions: in_range("regions", p.regions.unwrap_or(20), 1, 10_000)?,
            alpha,
            beta,
            m: in_range("m", p.m.unwrap_or(1), 1, 16)?,
            mn_max: in_range("mn-max", p.mn_max.unwrap_or(3), 1, 16)?,
            margin: in_range("margin", p.margin.unwrap_or(0.05), 1e-9, 0.5)?,
            attempts: in_range("attempts", p.attempts.unwrap_or(64), 1, 100_000)?,
            deterministic,
            threads,
        })
    }
}
