//! Command-line flags, JSON config files, and their merge.
//!
//! A config file is a flat JSON object whose keys are the long flag names
//! with `_` for `-`. Flags override the file; the seed falls back to the
//! `HYPVIS_SEED` environment variable and then to 0.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::output::Format;

pub const SEED_ENV: &str = "HYPVIS_SEED";

/// Parses a real number, also accepting multiples of π such as `pi`, `3pi`,
/// `1.5*pi` or `π`.
pub fn parse_real(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let stripped = t.strip_suffix("pi").or_else(|| t.strip_suffix('π'));
    match stripped {
        Some(coef) => {
            let coef = coef.trim().trim_end_matches('*').trim();
            if coef.is_empty() {
                Ok(PI)
            } else {
                coef.parse::<f64>()
                    .map(|c| c * PI)
                    .map_err(|e| format!("invalid number {text:?}: {e}"))
            }
        }
        None => t.parse::<f64>().map_err(|e| format!("invalid number {text:?}: {e}")),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RealRepr {
    Number(f64),
    Text(String),
}

impl RealRepr {
    fn value<E: serde::de::Error>(self) -> Result<f64, E> {
        match self {
            RealRepr::Number(x) => Ok(x),
            RealRepr::Text(s) => parse_real(&s).map_err(E::custom),
        }
    }
}

fn de_real<'de, D: Deserializer<'de>>(de: D) -> Result<Option<f64>, D::Error> {
    Option::<RealRepr>::deserialize(de)?.map(RealRepr::value).transpose()
}

fn de_reals<'de, D: Deserializer<'de>>(de: D) -> Result<Option<Vec<f64>>, D::Error> {
    match Option::<Vec<RealRepr>>::deserialize(de)? {
        Some(v) => v
            .into_iter()
            .map(RealRepr::value)
            .collect::<Result<Vec<_>, _>>()
            .map(Some),
        None => Ok(None),
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args, Deserialize, Serialize)]
#[serde(default)]
pub struct CommonArgs {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Master seed (falls back to HYPVIS_SEED, then 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output path (standard output when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for independent trials and grid cells.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

/// Merges `file` into `flags` field by field, flags winning.
pub trait Overlay: Sized {
    fn overlay(self, file: Self) -> Self;
}

macro_rules! impl_overlay {
    ($ty:ty; $($field:ident),* $(,)?) => {
        impl Overlay for $ty {
            fn overlay(mut self, file: Self) -> Self {
                $( if self.$field.is_none() { self.$field = file.$field; } )*
                self
            }
        }
    };
}

impl_overlay!(CommonArgs; seed, out, format, jobs);

#[derive(Debug, Clone, Default, Args, Deserialize, Serialize)]
#[serde(default)]
pub struct CroftonArgs {
    /// Dimensions, comma separated [default: 2,3,4].
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Curvatures, comma separated [default: 0,0.25,0.5,0.75,1].
    #[arg(long, value_delimiter = ',', value_parser = parse_real)]
    #[serde(deserialize_with = "de_reals")]
    pub lambdas: Option<Vec<f64>>,
    /// Segment lengths, comma separated [default: 0.1,1,5].
    #[arg(long, value_delimiter = ',', value_parser = parse_real)]
    #[serde(deserialize_with = "de_reals")]
    pub lengths: Option<Vec<f64>>,
    /// Intensity [default: pi].
    #[arg(long, value_parser = parse_real)]
    #[serde(deserialize_with = "de_real")]
    pub gamma: Option<f64>,
    /// Largest accepted relative error per cell [default: 1e-8].
    #[arg(long, value_parser = parse_real)]
    #[serde(deserialize_with = "de_real")]
    pub tolerance: Option<f64>,
}

impl_overlay!(CroftonArgs; dims, lambdas, lengths, gamma, tolerance);

/// Process parameters shared by the simulation commands.
#[derive(Debug, Clone, Default, Args, Deserialize, Serialize)]
#[serde(default)]
pub struct ProcessArgs {
    /// Dimension.
    #[arg(long)]
    pub d: Option<usize>,
    /// Curvature parameter in [0, 1].
    #[arg(long, value_parser = parse_real)]
    #[serde(deserialize_with = "de_real")]
    pub lambda: Option<f64>,
    /// Intensity (accepts multiples of pi, e.g. 3pi).
    #[arg(long, value_parser = parse_real)]
    #[serde(deserialize_with = "de_real")]
    pub gamma: Option<f64>,
    /// Hyperbolic truncation radius S.
    #[arg(long = "s-cutoff", short = 'S', value_parser = parse_real)]
    #[serde(deserialize_with = "de_real")]
    pub s_cutoff: Option<f64>,
    /// Hard cap on the number of hyperplanes per sample.
    #[arg(long)]
    pub n_max: Option<usize>,
}

impl_overlay!(ProcessArgs; d, lambda, gamma, s_cutoff, n_max);

#[derive(Debug, Clone, Default, Args, Deserialize, Serialize)]
#[serde(default)]
pub struct RenderArgs {
    /// Square canvas edge in pixels [default: 1000].
    #[arg(long)]
    pub canvas: Option<u32>,
    /// Rays used to trace the visibility region [default: 720].
    #[arg(long)]
    pub rays: Option<usize>,
    /// Draw only the hyperplanes.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub hide_region: Option<bool>,
}

impl_overlay!(RenderArgs; canvas, rays, hide_region);

#[derive(Debug, Clone, Default, Args, Deserialize, Serialize)]
#[serde(default)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub process: ProcessArgs,
    /// Also write a disc rendering (d = 2) to this path.
    #[arg(long)]
    pub render: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub style: RenderArgs,
}

impl Overlay for SimulateArgs {
    fn overlay(self, file: Self) -> Self {
        Self {
            process: self.process.overlay(file.process),
            render: self.render.or(file.render),
            style: self.style.overlay(file.style),
        }
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize, Serialize)]
#[serde(default)]
pub struct VolumeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub process: ProcessArgs,
    /// Independent trials [default: 2000].
    #[arg(long)]
    pub trials: Option<usize>,
    /// Rays per trial [default: 360].
    #[arg(long)]
    pub rays: Option<usize>,
}

impl Overlay for VolumeArgs {
    fn overlay(self, file: Self) -> Self {
        Self {
            process: self.process.overlay(file.process),
            trials: self.trials.or(file.trials),
            rays: self.rays.or(file.rays),
        }
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize, Serialize)]
#[serde(default)]
pub struct PhaseArgs {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, value_parser = parse_real)]
    #[serde(deserialize_with = "de_real")]
    pub lambda: Option<f64>,
    /// Intensities, comma separated [default: 2,pi,7].
    #[arg(long, value_delimiter = ',', value_parser = parse_real)]
    #[serde(deserialize_with = "de_reals")]
    pub gammas: Option<Vec<f64>>,
    /// Trials per intensity [default: 500].
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long = "s-cutoff", short = 'S', value_parser = parse_real)]
    #[serde(deserialize_with = "de_real")]
    pub s_cutoff: Option<f64>,
}

impl_overlay!(PhaseArgs; d, lambda, gammas, trials, s_cutoff);

#[derive(Debug, Clone, Default, Args, Deserialize, Serialize)]
#[serde(default)]
pub struct RadiiArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub process: ProcessArgs,
    /// Independent samples [default: 200].
    #[arg(long)]
    pub runs: Option<usize>,
    /// Largest index n reported [default: 1000].
    #[arg(long)]
    pub n: Option<usize>,
}

impl Overlay for RadiiArgs {
    fn overlay(self, file: Self) -> Self {
        Self {
            process: self.process.overlay(file.process),
            runs: self.runs.or(file.runs),
            n: self.n.or(file.n),
        }
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize, Serialize)]
#[serde(default)]
pub struct SheppArgs {
    #[arg(long, value_parser = parse_real)]
    #[serde(deserialize_with = "de_real")]
    pub lambda: Option<f64>,
    /// Terms of the series [default: 1000].
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "s-cutoff", short = 'S', value_parser = parse_real)]
    #[serde(deserialize_with = "de_real")]
    pub s_cutoff: Option<f64>,
}

impl_overlay!(SheppArgs; lambda, n, s_cutoff);

#[derive(Debug, Clone, Default, Args, Deserialize, Serialize)]
#[serde(default)]
pub struct RenderCmdArgs {
    /// Sample JSON written by `simulate`; when absent a sample is drawn.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub process: ProcessArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub style: RenderArgs,
}

impl Overlay for RenderCmdArgs {
    fn overlay(self, file: Self) -> Self {
        Self {
            input: self.input.or(file.input),
            process: self.process.overlay(file.process),
            style: self.style.overlay(file.style),
        }
    }
}

fn keys_of<T: Serialize + Default>() -> BTreeSet<String> {
    match serde_json::to_value(T::default()) {
        Ok(Value::Object(map)) => map.keys().cloned().collect(),
        _ => BTreeSet::new(),
    }
}

/// Reads a config file into the command arguments and the shared flags,
/// rejecting unknown keys.
pub fn load_file<T>(path: &Path) -> CliResult<(T, CommonArgs)>
where
    T: DeserializeOwned + Serialize + Default,
{
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::ConfigParse {
        path: path.to_path_buf(),
        source: e,
    })?;
    let Value::Object(map) = &value else {
        return Err(CliError::Usage(format!(
            "{}: config must be a JSON object",
            path.display()
        )));
    };
    let mut allowed = keys_of::<T>();
    allowed.extend(keys_of::<CommonArgs>());
    if let Some(bad) = map.keys().find(|k| !allowed.contains(*k)) {
        let known: Vec<_> = allowed.into_iter().collect();
        return Err(CliError::Usage(format!(
            "{}: unknown config key {bad:?} (known: {})",
            path.display(),
            known.join(", ")
        )));
    }
    let parse = |e: serde_json::Error| CliError::ConfigParse {
        path: path.to_path_buf(),
        source: e,
    };
    let args: T = serde_json::from_value(value.clone()).map_err(parse)?;
    let common: CommonArgs = serde_json::from_value(value).map_err(parse)?;
    Ok((args, common))
}

/// Applies the config file named in `common`, if any.
pub fn merge<T>(args: T, common: CommonArgs) -> CliResult<(T, CommonArgs)>
where
    T: DeserializeOwned + Serialize + Default + Overlay,
{
    match common.config.clone() {
        Some(path) => {
            let (file_args, file_common) = load_file::<T>(&path)?;
            Ok((args.overlay(file_args), common.overlay(file_common)))
        }
        None => Ok((args, common)),
    }
}

/// Flag, then config file, then `HYPVIS_SEED`, then 0.
pub fn resolve_seed(common: &CommonArgs) -> CliResult<u64> {
    if let Some(seed) = common.seed {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}={text:?} is not a 64-bit unsigned integer"))),
        Err(_) => Ok(0),
    }
}
