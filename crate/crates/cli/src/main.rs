//! `ettc`: extraction, evaluation, fixture generation and overlay rendering.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "ettc", version, about = "ETT tip and carina localisation from detection outputs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Turn detections into tip/carina points and distances.
    Extract(ExtractArgs),
    /// Score extraction records against ground truth.
    Evaluate(EvaluateArgs),
    /// Write a synthetic cohort with known ground truth.
    GenFixtures(GenArgs),
    /// Draw ground truth and predictions over each image.
    Render(RenderArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, env = "ETTC_JOBS")]
    pub jobs: Option<usize>,
    /// Override every annotation's pixel spacing (mm per pixel).
    #[arg(long)]
    pub pixel_spacing: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ExtractArgs {
    #[arg(long)]
    pub detections: PathBuf,
    #[arg(long)]
    pub annotations: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Box/mask disagreement in pixels above which the carina mask point wins.
    #[arg(long, default_value_t = 100.0)]
    pub fusion_threshold: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub annotations: PathBuf,
    /// Records written by `extract`.
    #[arg(long)]
    pub extractions: PathBuf,
    /// Detections, for the Dice criterion on masks.
    #[arg(long)]
    pub detections: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Suitable ETT-carina distance range in mm, inclusive.
    #[arg(long, value_parser = parse_range, default_value = "20,70")]
    pub suitable_range: (f64, f64),
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Error profile: `planted` or `perfect`.
    #[arg(long, default_value = "planted")]
    pub profile: String,
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    #[arg(long)]
    pub annotations: PathBuf,
    /// Extraction records; without them only ground truth is drawn.
    #[arg(long)]
    pub extractions: Option<PathBuf>,
    /// Detections, drawn as a silhouette when no background image exists.
    #[arg(long)]
    pub detections: Option<PathBuf>,
    /// Directory of `<image_id>.png` backgrounds.
    #[arg(long)]
    pub images: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `lo,hi`, got `{s}`"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(format!("range needs lo < hi, got {lo},{hi}"));
    }
    Ok((lo, hi))
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            bail!("--jobs must be at least 1");
        }
        builder = builder.num_threads(n);
    }
    builder.build().context("starting worker pool")
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Extract(a) => {
            if !(a.fusion_threshold.is_finite() && a.fusion_threshold > 0.0) {
                bail!("--fusion-threshold must be positive");
            }
            pool(a.common.jobs)?.install(|| commands::extract(&a))
        }
        Command::Evaluate(a) => pool(a.common.jobs)?.install(|| commands::evaluate(&a)),
        Command::GenFixtures(a) => commands::gen_fixtures(&a),
        Command::Render(a) => pool(a.common.jobs)?.install(|| commands::render(&a)),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ETTC_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
