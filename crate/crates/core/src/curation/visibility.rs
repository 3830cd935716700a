use std::path::Path;

use image::RgbImage;
use serde::{Deserialize, Serialize};

use super::crop::crop_vehicle;
use crate::annotation::{canonical_line, SceneAnnotation};
use crate::error::Result;
use crate::io::{save_png, write_text, ImageSource};
use crate::metrics::VisibilityRecord;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityOptions {
    pub min_width: f64,
    pub min_height: f64,
}

impl Default for VisibilityOptions {
    fn default() -> Self {
        Self {
            min_width: 32.0,
            min_height: 32.0,
        }
    }
}

/// A vehicle crop with its four per-position visible tags.
#[derive(Debug, Clone, PartialEq)]
pub struct VisibilitySample {
    pub scene_id: String,
    pub vehicle_id: String,
    pub crop: RgbImage,
    /// Ordered front-left, front-right, rear-left, rear-right.
    pub labels: [bool; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum ExclusionReason {
    TooSmall { width: f64, height: f64 },
    NoPositionLabels,
    ImageUnavailable { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub scene_id: String,
    pub vehicle_id: String,
    #[serde(flatten)]
    pub reason: ExclusionReason,
}

#[derive(Debug, Clone, Default)]
pub struct VisibilityExport {
    pub samples: Vec<VisibilitySample>,
    pub excluded: Vec<Exclusion>,
}

/// One sample per vehicle at least `min_width x min_height`, labelled with
/// its per-position visible tags.
pub fn export_visibility_dataset(
    scenes: &[SceneAnnotation],
    images: &dyn ImageSource,
    options: &VisibilityOptions,
) -> VisibilityExport {
    let mut out = VisibilityExport::default();
    for scene in scenes {
        let mut image: Option<std::result::Result<RgbImage, String>> = None;
        for vehicle in &scene.vehicles {
            let exclude = |reason| Exclusion {
                scene_id: scene.scene_id.clone(),
                vehicle_id: vehicle.vehicle_id.clone(),
                reason,
            };
            if vehicle.lights.iter().all(|l| l.position.is_none()) {
                out.excluded.push(exclude(ExclusionReason::NoPositionLabels));
                continue;
            }
            let (w, h) = (vehicle.bbox.width(), vehicle.bbox.height());
            if w < options.min_width || h < options.min_height {
                out.excluded.push(exclude(ExclusionReason::TooSmall { width: w, height: h }));
                continue;
            }
            let loaded = image.get_or_insert_with(|| {
                images.load(&scene.image_path).map_err(|e| e.to_string())
            });
            match loaded {
                Ok(img) => out.samples.push(VisibilitySample {
                    scene_id: scene.scene_id.clone(),
                    vehicle_id: vehicle.vehicle_id.clone(),
                    crop: crop_vehicle(img, &vehicle.bbox).0,
                    labels: vehicle.visibility(),
                }),
                Err(message) => out.excluded.push(exclude(ExclusionReason::ImageUnavailable {
                    message: message.clone(),
                })),
            }
        }
    }
    out
}

pub const VISIBILITY_LABELS_FILE: &str = "labels.jsonl";
pub const VISIBILITY_EXCLUDED_FILE: &str = "excluded.jsonl";

/// Writes `crops/*.png`, `labels.jsonl` and `excluded.jsonl` under `dir`.
pub fn write_visibility_dataset(export: &VisibilityExport, dir: &Path) -> Result<()> {
    let mut labels = String::new();
    for (i, s) in export.samples.iter().enumerate() {
        let rel = format!("crops/{i:06}.png");
        save_png(&s.crop, &dir.join(&rel))?;
        let mut rec = VisibilityRecord::from_labels(&s.scene_id, &s.vehicle_id, s.labels);
        rec.crop_path = Some(rel);
        labels.push_str(&canonical_line(&rec));
        labels.push('\n');
    }
    write_text(&dir.join(VISIBILITY_LABELS_FILE), &labels)?;
    let excluded: String = export
        .excluded
        .iter()
        .map(|e| canonical_line(e) + "\n")
        .collect();
    write_text(&dir.join(VISIBILITY_EXCLUDED_FILE), &excluded)
}
