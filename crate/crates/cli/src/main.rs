//! `dmusic`: synthesis, recovery, detection, decoupling, oracle sweeps and
//! benchmarks from the command line.
//!
//! Exit status is 0 on success, 1 when an algorithm fails (or, with
//! `--strict`, when the pipeline falls back or decoupling misses its gate),
//! and 2 for usage errors, unreadable inputs and malformed configs.

mod config;
mod manifest;

use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use dmusic_core::bench::{
    compare_dmusic_vs_music, min_separation_search_with, reference_min_separation, separation_grid, summarize_comparison,
    CompareConfig, DecouplingExperiment,
};
use dmusic_core::bounds_oracle::run_all_sweeps;
use dmusic_core::hankel_music::music_with_prior_outcome;
use dmusic_core::io::{read_measurement_csv, write_image_csv, write_locations_csv, write_measurement_csv, InstanceFile};
use dmusic_core::model::Placement;
use dmusic_core::{
    decouple, detect_clusters_with, modulate, music, random_instance, run, synthesize, DecoupleConfig, DetectParams,
    InstanceSpec, Measurement, MusicOptions,
};
use serde::Serialize;
use serde_json::json;

use manifest::RunManifest;

#[derive(Parser)]
#[command(name = "dmusic", version, about = "Super-resolution of clustered point sources")]
struct Cli {
    /// Worker threads for parallel trials and clusters (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a noisy measurement (and optionally the instance) to files.
    Synth(SynthArgs),
    /// Standard MUSIC on a measurement.
    Music(MusicArgs),
    /// Full D-MUSIC pipeline on a measurement.
    Dmusic(DmusicArgs),
    /// Cluster detection by subsampled MUSIC.
    Detect(DetectArgs),
    /// Split a measurement into per-cluster local measurements.
    Decouple(DecoupleArgs),
    /// Randomized checks of the supporting inequalities.
    Oracle(OracleArgs),
    /// Monte-Carlo experiments.
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Minimum cluster separation for stable decoupling at a multipole count.
    Table1(Table1Args),
    /// D-MUSIC against standard MUSIC: accuracy and wall time.
    Compare(CompareArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Measurement CSV with header x,re,im.
    #[arg(long = "in", value_name = "CSV")]
    input: PathBuf,
    /// Cutoff frequency of the measurement.
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
}

#[derive(Args)]
struct PipelineFlags {
    /// JSON file with PipelineConfig fields; flags below override it.
    #[arg(long, value_name = "JSON")]
    config: Option<PathBuf>,
    /// Override any config field, e.g. `--set c_msf=0.95` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Half-width of the interval known to contain every source.
    #[arg(long)]
    d_init: Option<f64>,
    /// Center of that interval.
    #[arg(long)]
    o_init: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    tps_source: Option<f64>,
    /// Use the unmodulated multipole basis.
    #[arg(long)]
    plain: bool,
}

impl PipelineFlags {
    /// Config file merged with overrides, as JSON and parsed.
    fn resolve(&self) -> Result<(serde_json::Value, dmusic_core::Config)> {
        let mut map = config::load_object(self.config.as_deref()).map_err(usage)?;
        let mut put = |k: &str, v: serde_json::Value| {
            map.insert(k.to_string(), v);
        };
        if let Some(v) = self.sigma {
            put("sigma", json!(v));
        }
        if let Some(v) = self.d_init {
            put("d_init", json!(v));
        }
        if let Some(v) = self.o_init {
            put("o_init", json!(v));
        }
        if let Some(v) = self.lambda {
            put("lambda", json!(v));
        }
        if let Some(v) = self.tps_source {
            put("tps_source", json!(v));
        }
        if self.plain {
            put("modulated", json!(false));
        }
        for raw in &self.set {
            let (k, v) = config::parse_assignment(raw).map_err(usage)?;
            map.insert(k, v);
        }
        let parsed = config::to_config(&map).map_err(usage)?;
        Ok((serde_json::to_value(&parsed)?, parsed))
    }
}

#[derive(Args)]
struct SynthArgs {
    /// Instance JSON; without it a random instance is drawn from `--seed`.
    #[arg(long, value_name = "JSON")]
    sources: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Noise level (default: the instance's, else 1e-3).
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cutoff frequency of a random instance.
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long, default_value_t = 2)]
    clusters_min: usize,
    #[arg(long, default_value_t = 5)]
    clusters_max: usize,
    /// Minimum center separation of a random instance, times 1/omega.
    #[arg(long, default_value_t = 12.0 * PI)]
    separation: f64,
    /// Cluster half-width of a random instance, times 1/omega.
    #[arg(long, default_value_t = PI)]
    half_width: f64,
    #[arg(long, default_value_t = 3)]
    max_sources: usize,
    /// Spacing of neighbouring sources in a random cluster (0 places them uniformly).
    #[arg(long, default_value_t = 1.0)]
    spacing: f64,
    /// Write the instance (random or given) here.
    #[arg(long, value_name = "JSON")]
    instance_out: Option<PathBuf>,
    #[arg(long, value_name = "CSV")]
    out: PathBuf,
}

#[derive(Args)]
struct MusicArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Noise level used by the order estimate.
    #[arg(long, default_value_t = 1e-3)]
    sigma: f64,
    /// Left end of the test region (default: the unaliased range).
    #[arg(long, allow_hyphen_values = true)]
    from: Option<f64>,
    /// Right end of the test region.
    #[arg(long, allow_hyphen_values = true)]
    to: Option<f64>,
    /// Test-point spacing.
    #[arg(long, default_value_t = 1e-2)]
    tps: f64,
    /// Fixed model order instead of the singular-value threshold.
    #[arg(long)]
    order: Option<usize>,
    /// Restrict to a prior interval around this center (needs --prior-half-width).
    #[arg(long, allow_hyphen_values = true, requires = "prior_half_width")]
    prior_center: Option<f64>,
    #[arg(long, requires = "prior_center")]
    prior_half_width: Option<f64>,
    /// Also write the imaging functional as CSV (omega,J).
    #[arg(long, value_name = "CSV")]
    image_out: Option<PathBuf>,
    /// Locations as JSON, or CSV when the name ends in .csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DmusicArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    pipeline: PipelineFlags,
    /// Exit with status 1 when the pipeline falls back to plain MUSIC.
    #[arg(long)]
    strict: bool,
    #[arg(long, value_name = "JSON")]
    out: PathBuf,
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    pipeline: PipelineFlags,
    #[arg(long, value_name = "JSON")]
    out: PathBuf,
}

#[derive(Args)]
struct DecoupleArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Cluster centers, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    centers: Vec<f64>,
    /// Cluster half-width (spatial).
    #[arg(long)]
    half_width: f64,
    #[arg(long, default_value_t = 1e-3)]
    sigma: f64,
    /// Fixed multipole count.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    plain: bool,
    /// Keep the global residual out of the local measurements.
    #[arg(long)]
    no_redistribute: bool,
    #[arg(long)]
    c_msf: Option<f64>,
    #[arg(long)]
    c_mea: Option<f64>,
    /// Exit with status 1 when the residual misses its gate.
    #[arg(long)]
    strict: bool,
    /// Write each local measurement as `local_<j>.csv` in this directory.
    #[arg(long, value_name = "DIR")]
    locals_dir: Option<PathBuf>,
    #[arg(long, value_name = "JSON")]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 1000)]
    draws: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Exit with status 1 on any violation.
    #[arg(long)]
    strict: bool,
    #[arg(long, value_name = "JSON")]
    out: PathBuf,
}

#[derive(Args)]
struct Table1Args {
    /// Multipole count.
    #[arg(long)]
    s: usize,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 1e-3)]
    sigma: f64,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    seed: u64,
    #[arg(long)]
    plain: bool,
    /// Separations to try, in units of pi/omega, comma separated (default 3, 3.5, ..., 50).
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    #[arg(long, value_name = "JSON")]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 5000)]
    seed: u64,
    /// Run trials one after another (for timing).
    #[arg(long)]
    sequential: bool,
    /// JSON file with comparison settings (CompareConfig fields).
    #[arg(long, value_name = "JSON")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "JSON")]
    out: PathBuf,
}

/// Errors the user can fix by changing the invocation.
#[derive(Debug)]
struct Usage(anyhow::Error);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(e: impl Into<anyhow::Error>) -> anyhow::Error {
    anyhow::Error::new(Usage(e.into()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<Usage>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(usage(anyhow!("--threads must be at least 1")));
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let threads = cli.threads;
    match cli.command {
        Command::Synth(a) => synth(a, threads),
        Command::Music(a) => music_cmd(a, threads),
        Command::Dmusic(a) => dmusic_cmd(a, threads),
        Command::Detect(a) => detect_cmd(a, threads),
        Command::Decouple(a) => decouple_cmd(a, threads),
        Command::Oracle(a) => oracle_cmd(a, threads),
        Command::Bench(BenchCommand::Table1(a)) => table1_cmd(a, threads),
        Command::Bench(BenchCommand::Compare(a)) => compare_cmd(a, threads),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_json(path: &Path, value: &impl Serialize, manifest: &mut RunManifest) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    manifest.output(path);
    Ok(())
}

fn read_input(input: &InputArgs, sigma: f64) -> Result<Measurement> {
    let file = File::open(&input.input).with_context(|| format!("cannot open {}", input.input.display())).map_err(usage)?;
    read_measurement_csv(BufReader::new(file), input.omega, sigma)
        .with_context(|| format!("cannot read measurement {}", input.input.display()))
        .map_err(usage)
}

fn synth(a: SynthArgs, threads: Option<usize>) -> Result<ExitCode> {
    let (instance, sigma) = match &a.sources {
        Some(path) => {
            let file = File::open(path).with_context(|| format!("cannot open {}", path.display())).map_err(usage)?;
            let inst = InstanceFile::read(BufReader::new(file))
                .with_context(|| format!("malformed instance {}", path.display()))
                .map_err(usage)?;
            let sigma = a.sigma.unwrap_or(inst.sigma);
            (inst, sigma)
        }
        None => {
            let sigma = a.sigma.unwrap_or(1e-3);
            let placement = if a.spacing > 0.0 {
                Placement::Chain { spacing: a.spacing, jitter: 0.1 }
            } else {
                Placement::Uniform { min_separation: 0.0 }
            };
            let spec = InstanceSpec::new(a.clusters_min, a.clusters_max, a.separation, a.half_width, a.omega)
                .sources_per_cluster(1, a.max_sources)
                .placement(placement);
            let (measure, region) = random_instance(&spec, a.seed).map_err(usage)?;
            (InstanceFile::from_instance(&measure, &region, sigma), sigma)
        }
    };
    let (measure, _) = instance.to_instance().map_err(usage)?;
    let y = synthesize(&measure, a.n, instance.omega, sigma, Some(a.seed)).map_err(usage)?;

    let config = json!({ "n": a.n, "sigma": sigma, "omega": instance.omega, "random_instance": a.sources.is_none() });
    let mut manifest = RunManifest::new("synth", config, Some(a.seed), threads);
    if let Some(p) = &a.sources {
        manifest = manifest.input(p);
    }
    let mut out = create(&a.out)?;
    write_measurement_csv(&mut out, &y)?;
    out.flush()?;
    manifest.output(&a.out);
    if let Some(p) = &a.instance_out {
        let file = InstanceFile { sigma, ..instance };
        write_json(p, &file, &mut manifest)?;
    }
    manifest.write_all()?;
    Ok(ExitCode::SUCCESS)
}

fn music_cmd(a: MusicArgs, threads: Option<usize>) -> Result<ExitCode> {
    let y = read_input(&a.input, a.sigma)?;
    let options = MusicOptions { order_override: a.order, ..MusicOptions::default() };
    let outcome = match (a.prior_center, a.prior_half_width) {
        (Some(c), Some(d)) => music_with_prior_outcome(&y, c, d, a.tps, a.sigma, &options)?,
        _ => {
            let reach = PI / (y.omega() * y.spacing());
            let from = a.from.unwrap_or(-reach);
            let to = a.to.unwrap_or(reach);
            music(&y, a.sigma, from, to, a.tps, &options)?
        }
    };
    let config = json!({
        "omega": a.input.omega, "sigma": a.sigma, "from": a.from, "to": a.to, "tps": a.tps, "order": a.order,
        "prior_center": a.prior_center, "prior_half_width": a.prior_half_width,
    });
    let mut manifest = RunManifest::new("music", config, None, threads).input(&a.input.input);
    if a.out.extension().is_some_and(|e| e == "csv") {
        let mut out = create(&a.out)?;
        write_locations_csv(&mut out, &outcome.locations)?;
        out.flush()?;
        manifest.output(&a.out);
    } else {
        let body = json!({
            "locations": outcome.locations,
            "estimated_order": outcome.estimated_order,
            "singular_values": outcome.singular_values,
        });
        write_json(&a.out, &body, &mut manifest)?;
    }
    if let Some(p) = &a.image_out {
        let mut out = create(p)?;
        write_image_csv(&mut out, &outcome.image)?;
        out.flush()?;
        manifest.output(p);
    }
    manifest.write_all()?;
    Ok(ExitCode::SUCCESS)
}

fn dmusic_cmd(a: DmusicArgs, threads: Option<usize>) -> Result<ExitCode> {
    let (snapshot, config) = a.pipeline.resolve()?;
    let y = read_input(&a.input, config.sigma)?;
    let report = run(&y, &config)?;
    let mut manifest = RunManifest::new("dmusic", snapshot, None, threads).input(&a.input.input);
    if let Some(p) = &a.pipeline.config {
        manifest = manifest.input(p);
    }
    write_json(&a.out, &report, &mut manifest)?;
    manifest.write_all()?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if a.strict && report.fallback {
        eprintln!("error: pipeline fell back to MUSIC on the full measurement");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn detect_cmd(a: DetectArgs, threads: Option<usize>) -> Result<ExitCode> {
    let (snapshot, config) = a.pipeline.resolve()?;
    let y = read_input(&a.input, config.sigma)?;
    let mut params = DetectParams::new(
        config.lambda,
        config.o_init,
        config.initial_half_width(&y),
        config.tps_cluster,
        config.resolved_ict(y.omega()),
        config.sigma,
    );
    params.lambdas.extend(config.lambda_ladder.iter().copied());
    params.music = config.music_options();
    let estimate = detect_clusters_with(&y, &params)?;
    let mut manifest = RunManifest::new("detect", snapshot, None, threads).input(&a.input.input);
    write_json(&a.out, &estimate, &mut manifest)?;
    manifest.write_all()?;
    Ok(ExitCode::SUCCESS)
}

fn decouple_cmd(a: DecoupleArgs, threads: Option<usize>) -> Result<ExitCode> {
    let y = read_input(&a.input, a.sigma)?;
    let defaults = DecoupleConfig::<f64>::default();
    let config = DecoupleConfig {
        modulated: !a.plain,
        redistribute_residual: !a.no_redistribute,
        order_override: a.order,
        c_msf: a.c_msf.unwrap_or(defaults.c_msf),
        c_mea: a.c_mea.unwrap_or(defaults.c_mea),
        ..defaults
    };
    let input = if config.modulated { modulate(&y)? } else { y };
    let result = decouple(&input, &a.centers, a.half_width, a.sigma, &config)?;

    let snapshot = json!({
        "omega": a.input.omega, "sigma": a.sigma, "centers": a.centers, "half_width": a.half_width,
        "order": a.order, "modulated": config.modulated, "redistribute_residual": config.redistribute_residual,
        "c_msf": config.c_msf, "c_mea": config.c_mea,
    });
    let mut manifest = RunManifest::new("decouple", snapshot, None, threads).input(&a.input.input);
    let mut locals = Vec::new();
    if let Some(dir) = &a.locals_dir {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for (j, local) in result.local_measurements.iter().enumerate() {
            let path = dir.join(format!("local_{j}.csv"));
            let mut out = create(&path)?;
            write_measurement_csv(&mut out, local)?;
            out.flush()?;
            manifest.output(&path);
            locals.push(path);
        }
    }
    let body = json!({
        "multipole_count": result.multipole_count,
        "centers": result.centers,
        "residual_norm": result.residual_norm,
        "success": result.success,
        "rcond": result.rcond,
        "conditioning_warning": result.conditioning_warning,
        "local_measurements": locals,
    });
    write_json(&a.out, &body, &mut manifest)?;
    manifest.write_all()?;
    if a.strict && !result.success {
        eprintln!("error: decoupling residual {} exceeds its gate", result.residual_norm);
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn oracle_cmd(a: OracleArgs, threads: Option<usize>) -> Result<ExitCode> {
    if a.draws == 0 {
        return Err(usage(anyhow!("--draws must be at least 1")));
    }
    let reports = run_all_sweeps(a.draws, a.seed)?;
    let passed = reports.iter().all(|r| r.passed());
    let mut manifest = RunManifest::new("oracle", json!({ "draws": a.draws }), Some(a.seed), threads);
    write_json(&a.out, &json!({ "passed": passed, "sweeps": reports }), &mut manifest)?;
    manifest.write_all()?;
    for r in &reports {
        println!("{}: {}/{} violations, max ratio {}", r.name, r.violations, r.draws, r.max_ratio);
    }
    if a.strict && !passed {
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn table1_cmd(a: Table1Args, threads: Option<usize>) -> Result<ExitCode> {
    let grid: Vec<f64> = match &a.grid {
        Some(g) => g.iter().map(|l| l * PI).collect(),
        None => separation_grid(),
    };
    let exp = DecouplingExperiment { modulated: !a.plain, ..DecouplingExperiment::new(a.s, grid[0], a.sigma, a.n) };
    let (found, visited) = match min_separation_search_with(&exp, &grid, a.trials, a.seed) {
        Ok((l, visited)) => (Some(l), visited),
        Err(dmusic_core::Error::SearchExhausted) => (None, Vec::new()),
        Err(e @ dmusic_core::Error::InvalidInput(_)) => return Err(usage(e)),
        Err(e) => return Err(e.into()),
    };
    let body = json!({
        "s": a.s,
        "sigma": a.sigma,
        "n": a.n,
        "trials": a.trials,
        "modulated": !a.plain,
        "min_separation": found,
        "min_separation_over_pi": found.map(|l| l / PI),
        "reference_over_pi": reference_min_separation(a.s).map(|l| l / PI),
        "visited": visited
            .iter()
            .map(|(l, r)| json!({ "separation": l, "separation_over_pi": l / PI, "ratio": r }))
            .collect::<Vec<_>>(),
    });
    let config = serde_json::to_value(exp)?;
    let mut manifest = RunManifest::new("bench table1", config, Some(a.seed), threads);
    write_json(&a.out, &body, &mut manifest)?;
    manifest.write_all()?;
    match found {
        Some(l) => {
            println!("L({}) = {}pi", a.s, l / PI);
            Ok(ExitCode::SUCCESS)
        }
        None => {
            eprintln!("error: no separation on the grid reached the success gate");
            Ok(ExitCode::from(1))
        }
    }
}

fn compare_cmd(a: CompareArgs, threads: Option<usize>) -> Result<ExitCode> {
    let mut config: CompareConfig = match &a.config {
        Some(path) => {
            let file = File::open(path).with_context(|| format!("cannot open {}", path.display())).map_err(usage)?;
            let mut de = serde_json::Deserializer::from_reader(BufReader::new(file));
            serde_path_to_error::deserialize(&mut de)
                .map_err(|e| usage(anyhow!("malformed config field `{}`: {}", e.path(), e.inner())))?
        }
        None => CompareConfig::default(),
    };
    if a.sequential {
        config.parallel = false;
    }
    if a.trials == 0 {
        return Err(usage(anyhow!("--trials must be at least 1")));
    }
    let records = compare_dmusic_vs_music(&config, a.trials, a.seed)?;
    let summary = summarize_comparison(&records);
    let mut manifest = RunManifest::new("bench compare", serde_json::to_value(&config)?, Some(a.seed), threads);
    if let Some(p) = &a.config {
        manifest = manifest.input(p);
    }
    write_json(&a.out, &json!({ "summary": summary, "records": records }), &mut manifest)?;
    manifest.write_all()?;
    println!(
        "D-MUSIC {}/{}, MUSIC {}/{}, median speed-up {}",
        summary.dmusic_correct, summary.trials, summary.music_correct, summary.trials, summary.median_speedup
    );
    Ok(ExitCode::SUCCESS)
}
