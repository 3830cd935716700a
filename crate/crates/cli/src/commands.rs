use std::path::{Path, PathBuf};

use log::info;
use serde::Deserialize;

use lightkit::annotation::{
    canonical_json, import_keypoint_dataset, import_segmentation_dataset, parse_scenes_unchecked,
    parse_scenes_with, position_label, serialize_scenes, validate_with, KeypointMapping,
    KeypointRecord, LightPosition, SceneAnnotation, SegmentationFrame, SegmentationOptions,
    ValidationOptions, Violation,
};
use lightkit::curation::{
    augment_reflect, compute_stats, curate as run_curate, export_visibility_dataset,
    positions_csv, read_manifest, read_manifest_index, write_manifest, write_stats,
    write_visibility_dataset, CropApproach, CurateOptions, LightStats, VisibilityOptions,
    POSITIONS_CSV,
};
use lightkit::geometry::Connectivity;
use lightkit::io::{
    load_rgb, parse_jsonl, read_text, save_png, write_text, DirImageSource, DirMaskSource,
    MaskSource,
};
use lightkit::metrics::{
    evaluate_predictions, parse_predictions, visibility_accuracy, EvalOptions, MatchCriterion,
    SizeStrata, VisibilityRecord,
};
use lightkit::overlay::{render_sample_overlay, render_scene_overlay};
use lightkit::LightError;

use crate::config::{parse_size, Config};
use crate::{
    AugmentArgs, CriterionKind, CurateArgs, EvalDetectArgs, EvalVisibilityArgs,
    ExportVisibilityArgs, ImportArgs, RenderOverlayArgs, SourceFormat, StatsArgs, TableFormat,
    ValidateArgs,
};

/// Why a command stopped: bad data (exit 1) or bad input/usage (exit 2).
#[derive(Debug)]
pub enum Failure {
    Domain(String),
    Usage(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Usage(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Domain(m) | Failure::Usage(m) => m,
        }
    }
}

impl From<LightError> for Failure {
    fn from(e: LightError) -> Self {
        match e {
            LightError::Io { .. }
            | LightError::Image { .. }
            | LightError::Parse { .. }
            | LightError::Json(_) => Failure::Usage(e.to_string()),
            LightError::Validation(ref v) => {
                print_violations(v);
                Failure::Domain(e.to_string())
            }
            LightError::Alignment {
                ref missing_labels,
                ref missing_predictions,
            } => {
                for id in missing_labels {
                    println!("unlabelled prediction: {id}");
                }
                for id in missing_predictions {
                    println!("missing prediction: {id}");
                }
                Failure::Domain(e.to_string())
            }
            other => Failure::Domain(other.to_string()),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn print_violations(violations: &[Violation]) {
    for v in violations {
        println!("{v}");
    }
}

fn parent_dir(path: &Path) -> PathBuf {
    path.parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn validation_options(flag: Option<f64>, config: &Config) -> Result<ValidationOptions, Failure> {
    let slack = flag
        .or(config.vehicle_slack)
        .unwrap_or(ValidationOptions::default().vehicle_slack);
    if !(slack >= 0.0) || !slack.is_finite() {
        return Err(usage(format!("vehicle slack must be >= 0, got {slack}")));
    }
    Ok(ValidationOptions {
        vehicle_slack: slack,
    })
}

fn load_scenes(path: &Path, options: &ValidationOptions) -> Result<Vec<SceneAnnotation>, Failure> {
    Ok(parse_scenes_with(&read_text(path)?, options)?)
}

fn position_summary(stats: &LightStats) -> String {
    let mut parts: Vec<String> = LightPosition::ALL
        .iter()
        .map(|&p| format!("{p}={}", stats.count(p)))
        .collect();
    if stats.unknown_position > 0 {
        parts.push(format!("{}={}", position_label(None), stats.unknown_position));
    }
    parts.push(format!("total={}", stats.total));
    parts.join(" ")
}

/// One line of a mask source file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaskFrameRecord {
    scene_id: String,
    image_path: String,
    width: u32,
    height: u32,
    mask_path: String,
}

pub fn import(args: &ImportArgs, config: &Config) -> CmdResult {
    let validation = validation_options(args.vehicle_slack, config)?;
    let text = read_text(&args.input)?;
    let scenes = match args.format {
        SourceFormat::Keypoint => {
            let mapping = match &args.mapping {
                Some(p) => KeypointMapping::from_json(&read_text(p)?)?,
                None => KeypointMapping::default_layout(),
            };
            let records: Vec<KeypointRecord> = parse_jsonl(&text)?;
            import_keypoint_dataset(&records, &mapping)?
        }
        SourceFormat::Mask => {
            let connectivity = match args
                .connectivity
                .as_deref()
                .map(|s| s.parse::<u8>().map_err(|e| e.to_string()))
                .transpose()
                .map_err(usage)?
                .or(config.connectivity)
            {
                Some(c) => Connectivity::try_from(c).map_err(|e| usage(e.to_string()))?,
                None => Connectivity::default(),
            };
            let options = SegmentationOptions {
                min_area: args
                    .min_area
                    .or(config.min_area)
                    .unwrap_or(SegmentationOptions::default().min_area),
                connectivity,
            };
            let root = args.mask_root.clone().unwrap_or_else(|| parent_dir(&args.input));
            let masks = DirMaskSource::new(root);
            let records: Vec<MaskFrameRecord> = parse_jsonl(&text)?;
            let frames = records
                .into_iter()
                .map(|r| {
                    Ok(SegmentationFrame {
                        mask: masks.load(&r.mask_path)?,
                        scene_id: r.scene_id,
                        image_path: r.image_path,
                        image_width: r.width,
                        image_height: r.height,
                        mask_ref: r.mask_path,
                    })
                })
                .collect::<Result<Vec<_>, LightError>>()?;
            import_segmentation_dataset(&frames, &options)?
        }
    };
    write_text(&args.out, &serialize_scenes(&scenes))?;
    let lights: usize = scenes
        .iter()
        .flat_map(|s| &s.vehicles)
        .map(|v| v.lights.iter().filter(|l| l.visible).count())
        .sum();
    info!("imported {} scene(s), {lights} visible light(s)", scenes.len());
    let violations = validate_with(&scenes, &validation);
    print_violations(&violations);
    println!(
        "scenes={} visible_lights={lights} violations={}",
        scenes.len(),
        violations.len()
    );
    Ok(u8::from(!violations.is_empty()))
}

pub fn validate(args: &ValidateArgs, config: &Config) -> CmdResult {
    let options = validation_options(args.vehicle_slack, config)?;
    let scenes = parse_scenes_unchecked(&read_text(&args.scenes)?)?;
    let violations = validate_with(&scenes, &options);
    print_violations(&violations);
    println!("scenes={} violations={}", scenes.len(), violations.len());
    Ok(u8::from(!violations.is_empty()))
}

pub fn curate(args: &CurateArgs, config: &Config) -> CmdResult {
    let options = CurateOptions {
        approach: args
            .approach
            .or(config.approach)
            .unwrap_or(CropApproach::VehicleOnly),
        workers: args.workers.or(config.workers).unwrap_or(0),
    };
    let scenes = load_scenes(&args.scenes, &validation_options(args.vehicle_slack, config)?)?;
    let root = args.image_root.clone().unwrap_or_else(|| parent_dir(&args.scenes));
    let source = args
        .scenes
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let manifest = run_curate(&scenes, &options, &DirImageSource::new(root), &source)?;
    write_manifest(&manifest, &args.out)?;
    for e in &manifest.errors {
        println!("scene error: {}: {}", e.scene_id, e.message);
    }
    let stats = compute_stats(&manifest.records());
    println!("{}", position_summary(&stats));
    if manifest.samples.is_empty() {
        return Err(Failure::Domain("no samples were curated".into()));
    }
    Ok(0)
}

pub fn augment(args: &AugmentArgs) -> CmdResult {
    let manifest = read_manifest(&args.manifest)?;
    let doubled = augment_reflect(&manifest);
    write_manifest(&doubled, &args.out)?;
    println!("samples={} -> {}", manifest.samples.len(), doubled.samples.len());
    Ok(0)
}

pub fn stats(args: &StatsArgs) -> CmdResult {
    let index = read_manifest_index(&args.manifest)?;
    let stats = compute_stats(&index.records);
    let out = args.out.clone().unwrap_or_else(|| args.manifest.clone());
    write_stats(&stats, &out)?;
    info!("wrote {}", out.join(POSITIONS_CSV).display());
    print!("{}", positions_csv(&stats));
    Ok(0)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => write_text(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

pub fn eval_detect(args: &EvalDetectArgs, config: &Config) -> CmdResult {
    let criterion = match args.criterion {
        CriterionKind::Iou => MatchCriterion::Iou(
            args.iou_threshold
                .or(config.iou_threshold)
                .unwrap_or(0.5),
        ),
        CriterionKind::Distance => MatchCriterion::ScaledDistance(
            args.dist_threshold
                .or(config.dist_threshold)
                .unwrap_or(MatchCriterion::DEFAULT_DISTANCE),
        ),
    };
    criterion.check().map_err(|e| usage(e.to_string()))?;
    let scenes = load_scenes(&args.scenes, &validation_options(args.vehicle_slack, config)?)?;
    let predictions = parse_predictions(&read_text(&args.predictions)?)
        .map_err(|e| usage(format!("{}: {e}", args.predictions.display())))?;
    let options = EvalOptions {
        criterion,
        class_agnostic: args.class_agnostic,
        strata: args.strata.then(SizeStrata::default),
    };
    let report = evaluate_predictions(&scenes, &predictions, &options)?;
    emit(&canonical_json(&report), args.out.as_deref())?;
    info!("mAP {}", report.map);
    Ok(0)
}

pub fn eval_visibility(args: &EvalVisibilityArgs) -> CmdResult {
    let parse = |p: &Path| -> Result<Vec<VisibilityRecord>, Failure> {
        parse_jsonl(&read_text(p)?).map_err(|e| usage(format!("{}: {e}", p.display())))
    };
    let predictions = parse(&args.predictions)?;
    let labels = parse(&args.labels)?;
    let report = visibility_accuracy(&predictions, &labels)?;
    let text = match args.format {
        TableFormat::Table => report.to_table(),
        TableFormat::Csv => report.to_csv(),
        TableFormat::Json => canonical_json(&report),
    };
    emit(&text, args.out.as_deref())?;
    Ok(0)
}

pub fn export_visibility(args: &ExportVisibilityArgs, config: &Config) -> CmdResult {
    let (min_width, min_height) = match args
        .min_vehicle_size
        .as_deref()
        .or(config.min_vehicle_size.as_deref())
    {
        Some(s) => parse_size(s).map_err(usage)?,
        None => {
            let d = VisibilityOptions::default();
            (d.min_width, d.min_height)
        }
    };
    let scenes = load_scenes(&args.scenes, &validation_options(args.vehicle_slack, config)?)?;
    let root = args.image_root.clone().unwrap_or_else(|| parent_dir(&args.scenes));
    let export = export_visibility_dataset(
        &scenes,
        &DirImageSource::new(root),
        &VisibilityOptions {
            min_width,
            min_height,
        },
    );
    write_visibility_dataset(&export, &args.out)?;
    println!("samples={} excluded={}", export.samples.len(), export.excluded.len());
    Ok(0)
}

fn file_stem_for(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect()
}

pub fn render_overlay(args: &RenderOverlayArgs, config: &Config) -> CmdResult {
    let mut written = 0usize;
    if let Some(scenes_path) = &args.scenes {
        let scenes = load_scenes(scenes_path, &validation_options(None, config)?)?;
        let root = args.image_root.clone().unwrap_or_else(|| parent_dir(scenes_path));
        for scene in &scenes {
            let image = load_rgb(&root.join(&scene.image_path))?;
            let path = args.out.join(format!("{}.png", file_stem_for(&scene.scene_id)));
            save_png(&render_scene_overlay(&image, scene), &path)?;
            written += 1;
        }
    } else if let Some(dir) = &args.manifest {
        let manifest = read_manifest(dir)?;
        for (i, sample) in manifest.samples.iter().enumerate() {
            save_png(&render_sample_overlay(sample), &args.out.join(format!("{i:06}.png")))?;
            written += 1;
        }
    }
    println!("overlays={written}");
    Ok(0)
}
