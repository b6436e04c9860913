use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use hypvis::crofton::{self, verify_crofton_grid};
use hypvis::render::{render_scene, RenderOptions};
use hypvis::sampler::{radii_asymptotics_diagnostic, sample_process, ProcessSample, SimConfig};
use hypvis::visibility::{estimate_covering_probability, estimate_mean_volume, shepp_diagnostic, trial_seed};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    merge, resolve_seed, CommonArgs, CroftonArgs, Overlay, PhaseArgs, ProcessArgs, RadiiArgs, RenderArgs,
    RenderCmdArgs, SheppArgs, SimulateArgs, VolumeArgs,
};
use crate::error::{CliError, CliResult};
use crate::output::{annotate_svg, write_document, Format, TableWriter};

/// Resolved shared settings for one invocation.
struct Run {
    seed: u64,
    format: Format,
    common: CommonArgs,
}

impl Run {
    fn new(common: CommonArgs, default_format: Format) -> CliResult<Self> {
        let seed = resolve_seed(&common)?;
        if let Some(jobs) = common.jobs {
            if jobs == 0 {
                return Err(CliError::Usage("--jobs must be at least 1".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build_global()
                .map_err(|e| CliError::Usage(format!("cannot start {jobs} worker threads: {e}")))?;
        }
        Ok(Self {
            seed,
            format: common.format.unwrap_or(default_format),
            common,
        })
    }

    fn out(&self) -> Option<&Path> {
        self.common.out.as_deref()
    }

    /// The effective configuration: resolved arguments plus seed and format.
    fn echo<T: Serialize>(&self, args: &T) -> CliResult<Value> {
        let mut value = serde_json::to_value(args)?;
        if let Value::Object(map) = &mut value {
            map.insert("seed".into(), json!(self.seed));
            map.insert("format".into(), serde_json::to_value(self.format)?);
            if let Some(jobs) = self.common.jobs {
                map.insert("jobs".into(), json!(jobs));
            }
        }
        Ok(value)
    }

    fn table<T: Serialize>(&self, command: &str, args: &T) -> CliResult<TableWriter> {
        TableWriter::create(self.out(), self.format, command, self.echo(args)?)
    }
}

fn process_defaults(d: usize, lambda: f64, gamma: f64, s_cutoff: f64) -> ProcessArgs {
    ProcessArgs {
        d: Some(d),
        lambda: Some(lambda),
        gamma: Some(gamma),
        s_cutoff: Some(s_cutoff),
        n_max: Some(hypvis::sampler::DEFAULT_N_MAX),
    }
}

fn render_defaults() -> RenderArgs {
    let opts = RenderOptions::default();
    RenderArgs {
        canvas: Some(opts.canvas_px),
        rays: Some(opts.n_boundary_rays),
        hide_region: Some(!opts.show_region),
    }
}

fn sim_config(p: &ProcessArgs, seed: u64) -> CliResult<SimConfig> {
    let get = |v: Option<f64>| v.expect("defaults applied");
    let cfg = SimConfig::new(
        p.d.expect("defaults applied"),
        get(p.lambda),
        get(p.gamma),
        get(p.s_cutoff),
        seed,
    )?;
    Ok(cfg.with_n_max(p.n_max.expect("defaults applied"))?)
}

fn render_options(style: &RenderArgs) -> RenderOptions {
    let defaults = RenderOptions::default();
    RenderOptions {
        canvas_px: style.canvas.unwrap_or(defaults.canvas_px),
        n_boundary_rays: style.rays.unwrap_or(defaults.n_boundary_rays),
        show_region: !style.hide_region.unwrap_or(false),
        ..defaults
    }
}

fn svg_document(sample: &ProcessSample, style: &RenderArgs, echo: &Value) -> CliResult<String> {
    let svg = render_scene(sample, &render_options(style))?;
    annotate_svg(&svg, echo)
}

pub fn verify_crofton(args: CroftonArgs, common: CommonArgs) -> CliResult<()> {
    let (args, common) = merge(args, common)?;
    let args = args.overlay(CroftonArgs {
        dims: Some(crofton::DEFAULT_DIMS.to_vec()),
        lambdas: Some(crofton::DEFAULT_LAMBDAS.to_vec()),
        lengths: Some(crofton::DEFAULT_LENGTHS.to_vec()),
        gamma: Some(PI),
        tolerance: Some(crofton::DEFAULT_TOLERANCE),
    });
    let run = Run::new(common, Format::Csv)?;
    let (dims, lambdas, lengths) = (
        args.dims.clone().unwrap_or_default(),
        args.lambdas.clone().unwrap_or_default(),
        args.lengths.clone().unwrap_or_default(),
    );
    let tolerance = args.tolerance.unwrap_or(crofton::DEFAULT_TOLERANCE);
    if !(tolerance >= 0.0) {
        return Err(CliError::Usage(format!(
            "tolerance must be non-negative, got {tolerance}"
        )));
    }
    let mut table = run.table("verify-crofton", &args)?;
    let cells = verify_crofton_grid(&dims, &lambdas, &lengths, args.gamma.unwrap_or(PI), tolerance)?;
    for cell in &cells {
        table.row(cell)?;
    }
    table.finish()?;
    let failed = cells.iter().filter(|c| !c.pass).count();
    let worst = cells.iter().map(|c| c.rel_error).fold(0.0, f64::max);
    eprintln!(
        "{} of {} cells within {tolerance:e}; worst relative error {worst:.3e}",
        cells.len() - failed,
        cells.len()
    );
    if failed > 0 {
        return Err(CliError::CheckFailed(format!(
            "{failed} cell(s) exceed tolerance {tolerance:e}"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct HyperplaneRow {
    index: usize,
    r: f64,
    hyperbolic_distance: f64,
    /// Unit normal, coordinates separated by spaces.
    direction: String,
}

pub fn simulate(args: SimulateArgs, common: CommonArgs) -> CliResult<()> {
    let (args, common) = merge(args, common)?;
    let args = SimulateArgs {
        process: args.process.overlay(process_defaults(2, 0.5, 2.0, 12.0)),
        render: args.render,
        style: args.style.overlay(render_defaults()),
    };
    let run = Run::new(common, Format::Json)?;
    let sample = sample_process(&sim_config(&args.process, run.seed)?)?;
    match run.format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&sample)?;
            text.push('\n');
            write_document(run.out(), &text)?;
        }
        Format::Csv => {
            let mut table = run.table("simulate", &args)?;
            for (i, (r, u)) in sample.radii.iter().zip(&sample.dirs).enumerate() {
                let direction: Vec<String> = u.coords().iter().map(f64::to_string).collect();
                table.row(&HyperplaneRow {
                    index: i + 1,
                    r: *r,
                    hyperbolic_distance: 2.0 * r.atanh(),
                    direction: direction.join(" "),
                })?;
            }
            table.finish()?;
        }
        Format::Svg => write_document(run.out(), &svg_document(&sample, &args.style, &run.echo(&args)?)?)?,
    }
    if let Some(path) = &args.render {
        write_document(Some(path), &svg_document(&sample, &args.style, &run.echo(&args)?)?)?;
    }
    eprintln!("{} hyperplanes, truncated by {:?}", sample.len(), sample.truncated_by);
    Ok(())
}

/// Row layout shared by the Monte-Carlo tables.
#[derive(Serialize)]
struct EstimateRow {
    gamma: f64,
    lambda: f64,
    d: usize,
    #[serde(rename = "S")]
    s_cutoff: f64,
    trials: usize,
    value: f64,
    std_error: f64,
    censored_fraction: f64,
}

pub fn estimate_volume(args: VolumeArgs, common: CommonArgs) -> CliResult<()> {
    let (args, common) = merge(args, common)?;
    let args = VolumeArgs {
        process: args.process.overlay(process_defaults(2, 0.0, 3.0 * PI, 15.0)),
        trials: args.trials.or(Some(2000)),
        rays: args.rays.or(Some(360)),
    };
    let run = Run::new(common, Format::Csv)?;
    let cfg = sim_config(&args.process, run.seed)?;
    let trials = args.trials.unwrap_or_default();
    let mut table = run.table("estimate-volume", &args)?;
    let est = estimate_mean_volume(&cfg, trials, args.rays.unwrap_or_default())?;
    table.row(&EstimateRow {
        gamma: cfg.gamma,
        lambda: cfg.lambda,
        d: cfg.d,
        s_cutoff: cfg.s_cutoff,
        trials,
        value: est.estimate,
        std_error: est.std_error,
        censored_fraction: est.censored_fraction,
    })?;
    table.finish()
}

pub fn phase_scan(args: PhaseArgs, common: CommonArgs) -> CliResult<()> {
    let (args, common) = merge(args, common)?;
    let args = args.overlay(PhaseArgs {
        d: Some(2),
        lambda: Some(0.5),
        gammas: Some(vec![2.0, PI, 7.0]),
        trials: Some(500),
        s_cutoff: Some(12.0),
    });
    let run = Run::new(common, Format::Csv)?;
    let mut gammas = args.gammas.clone().unwrap_or_default();
    if gammas.is_empty() {
        return Err(CliError::Usage("--gammas needs at least one value".into()));
    }
    gammas.sort_by(f64::total_cmp);
    let (d, lambda, s_cutoff) = (
        args.d.unwrap_or(2),
        args.lambda.unwrap_or(0.5),
        args.s_cutoff.unwrap_or(12.0),
    );
    let trials = args.trials.unwrap_or(500);
    let mut table = run.table("phase-scan", &args)?;
    for gamma in gammas {
        let cfg = SimConfig::new(d, lambda, gamma, s_cutoff, run.seed)?;
        let est = estimate_covering_probability(&cfg, trials)?;
        let p = est.fraction_covered;
        table.row(&EstimateRow {
            gamma,
            lambda,
            d,
            s_cutoff,
            trials,
            value: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
            censored_fraction: 1.0 - p,
        })?;
    }
    table.finish()
}

/// `1, 2, 5, 10, 20, 50, ...` up to and including `n`.
fn checkpoints(n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut scale = 1usize;
    'outer: loop {
        for m in [1, 2, 5] {
            let k = m * scale;
            if k > n {
                break 'outer;
            }
            out.push(k);
        }
        scale = match scale.checked_mul(10) {
            Some(s) => s,
            None => break,
        };
    }
    if out.last() != Some(&n) {
        out.push(n);
    }
    out
}

pub fn radii(args: RadiiArgs, common: CommonArgs) -> CliResult<()> {
    let (args, common) = merge(args, common)?;
    let args = RadiiArgs {
        process: args.process.overlay(process_defaults(2, 1.0, PI, 30.0)),
        runs: args.runs.or(Some(200)),
        n: args.n.or(Some(1000)),
    };
    let run = Run::new(common, Format::Csv)?;
    let n = args.n.unwrap_or(1000);
    let runs = args.runs.unwrap_or(200);
    if n == 0 || runs == 0 {
        return Err(CliError::Usage("--n and --runs must be at least 1".into()));
    }
    let mut process = args.process.clone();
    process.n_max = Some(process.n_max.map_or(n, |m| m.min(n)));
    let base = sim_config(&process, run.seed)?;
    let mut table = run.table("diagnostics radii", &args)?;
    let samples: Vec<ProcessSample> = (0..runs as u64)
        .into_par_iter()
        .map(|i| sample_process(&base.with_seed(trial_seed(base.seed, i))))
        .collect::<Result<_, _>>()?;
    let rows = radii_asymptotics_diagnostic(&samples, &checkpoints(n))?;
    for row in &rows {
        table.row(row)?;
    }
    table.finish()
}

pub fn shepp(args: SheppArgs, common: CommonArgs) -> CliResult<()> {
    let (args, common) = merge(args, common)?;
    let args = args.overlay(SheppArgs {
        lambda: Some(0.0),
        n: Some(1000),
        s_cutoff: Some(30.0),
    });
    let run = Run::new(common, Format::Csv)?;
    let cfg = SimConfig::new(
        2,
        args.lambda.unwrap_or(0.0),
        PI,
        args.s_cutoff.unwrap_or(30.0),
        run.seed,
    )?;
    let mut table = run.table("diagnostics shepp", &args)?;
    let rows = shepp_diagnostic(&cfg, args.n.unwrap_or(1000))?;
    for row in &rows {
        table.row(row)?;
    }
    table.finish()
}

pub fn render(args: RenderCmdArgs, common: CommonArgs) -> CliResult<()> {
    let (args, common) = merge(args, common)?;
    let args = RenderCmdArgs {
        process: match args.input {
            Some(_) => args.process,
            None => args.process.overlay(process_defaults(2, 0.5, 2.0, 12.0)),
        },
        input: args.input,
        style: args.style.overlay(render_defaults()),
    };
    let run = Run::new(common, Format::Svg)?;
    if run.format != Format::Svg {
        return Err(CliError::Usage("render writes SVG only".into()));
    }
    let sample = match &args.input {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let sample: ProcessSample = serde_json::from_str(&text).map_err(|e| CliError::ConfigParse {
                path: path.clone(),
                source: e,
            })?;
            sample.config.validate()?;
            sample
        }
        None => sample_process(&sim_config(&args.process, run.seed)?)?,
    };
    let mut echo = run.echo(&args)?;
    if args.input.is_some() {
        echo["sample_config"] = serde_json::to_value(&sample.config)?;
    }
    write_document(run.out(), &svg_document(&sample, &args.style, &echo)?)
}
