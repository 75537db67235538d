//! `radar-mot` command-line interface.

mod error;
mod io;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime};

use clap::{Args, Parser, Subcommand, ValueEnum};
use radar_mot::config::{Framework, PipelineConfig};
use radar_mot::metrics::{fps_benchmark, tp_size_histogram, MetricsConfig};
use radar_mot::pipelines::run_pipeline;
use radar_mot::scenario::{preset, simulate, ScenarioConfig};

use crate::error::CliError;
use crate::io::{
    load_frames, load_tracks, manifest_path_for, save_frames, save_json, save_text, save_tracks, InputFile, RunManifest,
    FRAMES_FILE,
};

#[derive(Parser)]
#[command(name = "radar-mot", version, about = "Online multi-object tracking for 4D imaging radar")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic radar sequence.
    Simulate(SimulateArgs),
    /// Run a tracking pipeline over frame files.
    Track(TrackArgs),
    /// Score track records against ground truth.
    Evaluate(EvaluateArgs),
    /// Export tabular summaries of track records.
    Report(ReportArgs),
    /// Measure tracking throughput.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario TOML file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    scenario: Option<PathBuf>,
    /// Built-in scenario: default, roadside or dense_clutter.
    #[arg(long)]
    preset: Option<String>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; the sequence goes to `<out>/<seq_id>/`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ConfigArgs {
    /// Config TOML layered over the defaults; may be repeated.
    #[arg(long = "config")]
    configs: Vec<PathBuf>,
    /// `dotted.key=value` override applied last; may be repeated.
    #[arg(long = "set", value_parser = parse_override)]
    overrides: Vec<(String, String)>,
}

#[derive(Args)]
struct TrackArgs {
    /// Defaults to the configured framework.
    #[arg(long)]
    framework: Option<Framework>,
    /// Frames file, sequence directory, or directory of sequence directories.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
    /// Output track file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Frames with ground truth (file or directory).
    #[arg(long)]
    gt: PathBuf,
    /// Track records.
    #[arg(long)]
    pred: PathBuf,
    /// Add class-agnostic TP/FN counts within `--radius`.
    #[arg(long)]
    class_agnostic: bool,
    /// Matching radius for the class-agnostic counts (m).
    #[arg(long, default_value_t = 2.0)]
    radius: f64,
    /// Add a MOTA sweep over `--alphas`.
    #[arg(long)]
    alpha_sweep: bool,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 0.6, 0.7, 0.8])]
    alphas: Vec<f64>,
    /// Machine-readable JSON report.
    #[arg(long)]
    report: PathBuf,
    /// Also write the plain-text tables here.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum HistogramKind {
    ExtentSize,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long, value_enum)]
    histogram: HistogramKind,
    /// Ground truth; when given only true-positive boxes are counted.
    #[arg(long)]
    gt: Option<PathBuf>,
    #[arg(long, default_value_t = 0.25)]
    bin_width: f64,
    /// CSV output.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    framework: Option<Framework>,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 5)]
    repeat: usize,
    #[command(flatten)]
    config: ConfigArgs,
    /// JSON output with the latency summary.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_override(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got '{s}'"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<serde_json::Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Internal(e.to_string()))
}

/// Layered pipeline config and the input records for the manifest.
fn load_config(args: &ConfigArgs) -> Result<(PipelineConfig, toml::Value, Vec<InputFile>), CliError> {
    let texts = args.configs.iter().map(|p| read_text(p)).collect::<Result<Vec<_>, _>>()?;
    let layers: Vec<&str> = texts.iter().map(String::as_str).collect();
    let (cfg, merged) = PipelineConfig::layered(&layers, &args.overrides)?;
    let inputs = args.configs.iter().map(|p| InputFile::read(p)).collect::<Result<_, _>>()?;
    Ok((cfg, merged, inputs))
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), CliError> {
    let started = SystemTime::now();
    let t0 = Instant::now();
    let (mut sc, inputs) = match (&a.scenario, &a.preset) {
        (Some(path), _) => (ScenarioConfig::from_toml(&read_text(path)?)?, vec![InputFile::read(path)?]),
        (None, Some(name)) => (
            preset(name).ok_or_else(|| CliError::Input(format!("unknown preset '{name}'")))?,
            Vec::new(),
        ),
        (None, None) => unreachable!("clap requires one of --scenario and --preset"),
    };
    if let Some(seed) = a.seed {
        sc.seed = seed;
    }
    sc.validate()?;
    let frames = simulate(&sc)?;
    let dir = a.out.join(&sc.seq_id);
    let frames_path = dir.join(FRAMES_FILE);
    save_frames(&frames_path, &frames)?;
    log::info!("wrote {} frames to {}", frames.len(), frames_path.display());

    let mut m = RunManifest::new("simulate", to_json(&sc)?, started, t0.elapsed());
    m.inputs = inputs;
    m.seed = Some(sc.seed);
    m.outputs = vec![frames_path.display().to_string()];
    save_json(&dir.join("manifest.json"), &m)
}

fn cmd_track(a: TrackArgs) -> Result<(), CliError> {
    let started = SystemTime::now();
    let (cfg, merged, mut inputs) = load_config(&a.config)?;
    let framework = a.framework.unwrap_or(cfg.framework);
    let (frames, files) = load_frames(&a.input)?;
    let t0 = Instant::now();
    let records = run_pipeline(framework, &frames, &cfg)?;
    log::info!("{framework}: {} records from {} frames", records.len(), frames.len());
    save_tracks(&a.out, &records)?;

    let mut config = to_json(&merged)?;
    config["framework"] = serde_json::Value::String(framework.to_string());
    let mut m = RunManifest::new("track", config, started, t0.elapsed());
    for f in &files {
        inputs.push(InputFile::read(f)?);
    }
    m.inputs = inputs;
    m.outputs = vec![a.out.display().to_string()];
    save_json(&manifest_path_for(&a.out), &m)
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<(), CliError> {
    let started = SystemTime::now();
    let t0 = Instant::now();
    let cfg = MetricsConfig::default();
    if a.alpha_sweep && a.alphas.iter().any(|x| !(*x > 0.0 && *x < 1.0)) {
        return Err(radar_mot::config::ConfigError::Invalid("alphas must lie in (0, 1)".into()).into());
    }
    if !a.radius.is_finite() || a.radius <= 0.0 {
        return Err(radar_mot::config::ConfigError::Invalid("radius must be positive".into()).into());
    }
    let (frames, files) = load_frames(&a.gt)?;
    let records = load_tracks(&a.pred)?;
    let r = report::evaluate(
        &records,
        &frames,
        &cfg,
        a.alpha_sweep.then_some(a.alphas.as_slice()),
        a.class_agnostic.then_some(a.radius),
    );
    let table = report::render_evaluation(&r);
    print!("{table}");
    save_json(&a.report, &r)?;
    let mut outputs = vec![a.report.display().to_string()];
    if let Some(t) = &a.table {
        save_text(t, &table)?;
        outputs.push(t.display().to_string());
    }
    let config = serde_json::json!({
        "metrics": to_json(&cfg)?,
        "alpha_sweep": a.alpha_sweep.then_some(&a.alphas),
        "class_agnostic_radius": a.class_agnostic.then_some(a.radius),
    });
    let mut m = RunManifest::new("evaluate", config, started, t0.elapsed());
    for f in &files {
        m.inputs.push(InputFile::read(f)?);
    }
    m.inputs.push(InputFile::read(&a.pred)?);
    m.outputs = outputs;
    save_json(&manifest_path_for(&a.report), &m)
}

fn cmd_report(a: ReportArgs) -> Result<(), CliError> {
    let started = SystemTime::now();
    let t0 = Instant::now();
    if !a.bin_width.is_finite() || a.bin_width <= 0.0 {
        return Err(radar_mot::config::ConfigError::Invalid("bin width must be positive".into()).into());
    }
    let records = load_tracks(&a.pred)?;
    let gt = a.gt.as_deref().map(load_frames).transpose()?;
    let cfg = MetricsConfig::default();
    let HistogramKind::ExtentSize = a.histogram;
    let h = tp_size_histogram(&records, gt.as_ref().map(|(f, _)| f.as_slice()), &cfg, a.bin_width);
    let csv = report::histogram_csv(&h);
    save_text(&a.out, &csv)?;
    println!("{} boxes, bin width {} m", h.boxes, a.bin_width);

    let config = serde_json::json!({ "histogram": "extent-size", "bin_width": a.bin_width, "metrics": to_json(&cfg)? });
    let mut m = RunManifest::new("report", config, started, t0.elapsed());
    m.inputs.push(InputFile::read(&a.pred)?);
    if let Some((_, files)) = &gt {
        for f in files {
            m.inputs.push(InputFile::read(f)?);
        }
    }
    m.outputs = vec![a.out.display().to_string()];
    save_json(&manifest_path_for(&a.out), &m)
}

fn cmd_bench(a: BenchArgs) -> Result<(), CliError> {
    let started = SystemTime::now();
    let (cfg, merged, mut inputs) = load_config(&a.config)?;
    let framework = a.framework.unwrap_or(cfg.framework);
    let (frames, files) = load_frames(&a.input)?;
    if frames.is_empty() {
        return Err(CliError::Input("benchmark needs at least one frame".into()));
    }
    let t0 = Instant::now();
    let result = fps_benchmark(framework, &frames, &cfg, a.repeat)?;
    print!("{}", report::render_bench(&result));
    if let Some(out) = &a.out {
        save_json(out, &result)?;
        let mut config = to_json(&merged)?;
        config["framework"] = serde_json::Value::String(framework.to_string());
        let mut m = RunManifest::new("bench", config, started, t0.elapsed());
        for f in &files {
            inputs.push(InputFile::read(f)?);
        }
        m.inputs = inputs;
        m.outputs = vec![out.display().to_string()];
        save_json(&manifest_path_for(out), &m)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Track(a) => cmd_track(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Report(a) => cmd_report(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
