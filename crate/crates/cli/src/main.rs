mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lightkit::curation::CropApproach;

use crate::config::Config;

/// Vehicle-light annotation curation and detector evaluation.
#[derive(Debug, Parser)]
#[command(name = "lightkit", version, about)]
struct Cli {
    /// TOML file with default option values; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Increase log verbosity (repeatable). Logs go to standard error.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceFormat {
    /// JSON Lines of per-image vehicle keypoints.
    Keypoint,
    /// JSON Lines of images with light segmentation masks.
    Mask,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionKind {
    Iou,
    Distance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert a keypoint or mask source into a canonical scene document.
    Import(ImportArgs),
    /// Check a scene document against the schema invariants.
    Validate(ValidateArgs),
    /// Cut 128x128 light-centered crops and offset targets.
    Curate(CurateArgs),
    /// Append the horizontal reflection of every sample.
    Augment(AugmentArgs),
    /// Per-position counts and light width/height histograms.
    Stats(StatsArgs),
    /// Score light detections against annotated scenes.
    EvalDetect(EvalDetectArgs),
    /// Per-position visibility accuracy table.
    EvalVisibility(EvalVisibilityArgs),
    /// Export vehicle crops with per-position visibility labels.
    ExportVisibility(ExportVisibilityArgs),
    /// Draw annotations over scene images or curated crops.
    RenderOverlay(RenderOverlayArgs),
}

#[derive(Debug, Args)]
pub struct ImportArgs {
    #[arg(long, value_enum)]
    pub format: SourceFormat,
    /// Source records (JSON Lines).
    pub input: PathBuf,
    /// Keypoint-id mapping (JSON); the built-in layout is used when omitted.
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    /// Directory mask paths are relative to; defaults to the input's directory.
    #[arg(long)]
    pub mask_root: Option<PathBuf>,
    /// Smallest connected component kept as a light, in pixels.
    #[arg(long)]
    pub min_area: Option<usize>,
    #[arg(long, value_parser = ["4", "8"])]
    pub connectivity: Option<String>,
    #[arg(long)]
    pub vehicle_slack: Option<f64>,
    /// Scene document to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub scenes: PathBuf,
    #[arg(long)]
    pub vehicle_slack: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CurateArgs {
    pub scenes: PathBuf,
    #[arg(long)]
    pub approach: Option<CropApproach>,
    /// Worker threads; changes wall time only.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Directory scene image paths are relative to; defaults to the scene file's directory.
    #[arg(long)]
    pub image_root: Option<PathBuf>,
    #[arg(long)]
    pub vehicle_slack: Option<f64>,
    /// Output directory for `manifest.jsonl` and `crops/`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    /// Manifest directory to read.
    pub manifest: PathBuf,
    /// Output directory; may equal the input.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    pub manifest: PathBuf,
    /// Where the CSV reports go; defaults to the manifest directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalDetectArgs {
    /// Prediction JSON Lines.
    #[arg(long)]
    pub predictions: PathBuf,
    #[arg(long)]
    pub scenes: PathBuf,
    #[arg(long, value_enum, default_value = "iou")]
    pub criterion: CriterionKind,
    #[arg(long)]
    pub iou_threshold: Option<f64>,
    /// Center distance threshold as a fraction of vehicle width.
    #[arg(long)]
    pub dist_threshold: Option<f64>,
    /// Pool all positions into one class.
    #[arg(long)]
    pub class_agnostic: bool,
    /// Add small/medium/large light-area strata.
    #[arg(long)]
    pub strata: bool,
    #[arg(long)]
    pub vehicle_slack: Option<f64>,
    /// Report file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalVisibilityArgs {
    #[arg(long)]
    pub predictions: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long, value_enum, default_value = "table")]
    pub format: TableFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportVisibilityArgs {
    pub scenes: PathBuf,
    #[arg(long)]
    pub image_root: Option<PathBuf>,
    /// Smallest vehicle box kept, as WxH.
    #[arg(long)]
    pub min_vehicle_size: Option<String>,
    #[arg(long)]
    pub vehicle_slack: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RenderOverlayArgs {
    /// Scene document; overlays are drawn on the scene images.
    #[arg(long, conflicts_with = "manifest", required_unless_present = "manifest")]
    pub scenes: Option<PathBuf>,
    #[arg(long, requires = "scenes")]
    pub image_root: Option<PathBuf>,
    /// Manifest directory; overlays are drawn on the curated crops.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .target(env_logger::Target::Stderr)
        .init();
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.verbose);
    let config = match cli.config.as_deref().map(Config::load).transpose() {
        Ok(c) => c.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Import(a) => commands::import(&a, &config),
        Command::Validate(a) => commands::validate(&a, &config),
        Command::Curate(a) => commands::curate(&a, &config),
        Command::Augment(a) => commands::augment(&a),
        Command::Stats(a) => commands::stats(&a),
        Command::EvalDetect(a) => commands::eval_detect(&a, &config),
        Command::EvalVisibility(a) => commands::eval_visibility(&a),
        Command::ExportVisibility(a) => commands::export_visibility(&a, &config),
        Command::RenderOverlay(a) => commands::render_overlay(&a, &config),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
