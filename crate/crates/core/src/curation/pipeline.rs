use std::cmp::Ordering;

use image::RgbImage;
use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::crop::{crop_light_centered, crop_vehicle, to_vehicle_frame, HALF_CROP};
use super::sample::{corner_offset_targets, CropApproach, CuratedSample, SampleRecord};
use crate::annotation::{position_label, LightAnnotation, SceneAnnotation, VehicleInstance};
use crate::error::{LightError, Result};
use crate::geometry::{CornerSet, PixelPoint};
use crate::io::ImageSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CurateOptions {
    pub approach: CropApproach,
    /// Worker threads for per-scene work; 0 picks the rayon default.
    pub workers: usize,
}

impl Default for CurateOptions {
    fn default() -> Self {
        Self {
            approach: CropApproach::VehicleOnly,
            workers: 0,
        }
    }
}

/// A scene that could not be curated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneError {
    pub scene_id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub approach: CropApproach,
    /// Name of the scene collection the samples came from.
    pub source: String,
    /// Augmentations applied after curation, in order.
    #[serde(default)]
    pub augmentations: Vec<String>,
}

/// Curated samples in deterministic `(scene, vehicle, position)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub provenance: Provenance,
    pub samples: Vec<CuratedSample>,
    pub errors: Vec<SceneError>,
}

impl DatasetManifest {
    pub fn records(&self) -> Vec<SampleRecord> {
        self.samples.iter().map(|s| s.record.clone()).collect()
    }
}

fn eligible(light: &LightAnnotation, approach: CropApproach) -> bool {
    // lights without a known position have no vehicle to crop
    light.visible
        && light.resolved_center().is_some()
        && (approach == CropApproach::SceneContext || light.position.is_some())
}

fn sample_id(scene: &SceneAnnotation, vehicle: &VehicleInstance, index: usize, light: &LightAnnotation) -> String {
    match light.position {
        Some(p) => format!("{}/{}/{}", scene.scene_id, vehicle.vehicle_id, p),
        None => format!(
            "{}/{}/{}-{index}",
            scene.scene_id,
            vehicle.vehicle_id,
            position_label(None)
        ),
    }
}

/// Curates one light into a sample.
///
/// `scene_image` is the full scene raster. For the vehicle-only approach the
/// vehicle is cropped first and the light center translated into the
/// vehicle frame before windowing; corners follow the same translation.
pub fn curate_light(
    scene: &SceneAnnotation,
    scene_image: &RgbImage,
    vehicle: &VehicleInstance,
    light_index: usize,
    approach: CropApproach,
) -> Result<CuratedSample> {
    let light = &vehicle.lights[light_index];
    let center = light
        .resolved_center()
        .ok_or_else(|| LightError::invalid("light has no center, corners or box"))?;

    let (crop, frame_origin) = match approach {
        CropApproach::VehicleOnly => {
            let (vehicle_img, (vx, vy)) = crop_vehicle(scene_image, &vehicle.bbox);
            let origin = PixelPoint::new(vx as f64, vy as f64);
            let crop = crop_light_centered(&vehicle_img, to_vehicle_frame(center, origin))?;
            (crop, origin)
        }
        CropApproach::SceneContext => (crop_light_centered(scene_image, center)?, PixelPoint::default()),
    };

    let local_corners = match &light.corners {
        Some(set) => CornerSet {
            corners: set
                .corners
                .iter()
                .map(|c| c.map(|p| crop.to_local(to_vehicle_frame(p, frame_origin))))
                .collect(),
            visible: set.visible.clone(),
        },
        None => CornerSet {
            corners: vec![None; 4],
            visible: vec![false; 4],
        },
    };
    let mid = HALF_CROP as f64;
    let targets = corner_offset_targets(&local_corners, PixelPoint::new(mid, mid));
    let (cx, cy) = crop.center_pixel();

    Ok(CuratedSample {
        record: SampleRecord {
            sample_id: sample_id(scene, vehicle, light_index, light),
            scene_id: scene.scene_id.clone(),
            vehicle_id: vehicle.vehicle_id.clone(),
            position: light.position,
            light_index,
            approach,
            center: [cx + frame_origin.x as i64, cy + frame_origin.y as i64],
            pad: crop.pad,
            offsets: targets.offsets,
            corner_visible: targets.visible,
            clipped: targets.clipped,
            reflected: false,
            crop_path: String::new(),
        },
        crop: crop.image,
    })
}

fn curate_scene(
    scene: &SceneAnnotation,
    approach: CropApproach,
    images: &dyn ImageSource,
) -> std::result::Result<Vec<CuratedSample>, SceneError> {
    let wanted: Vec<(usize, usize)> = scene
        .vehicles
        .iter()
        .enumerate()
        .flat_map(|(vi, v)| {
            v.lights
                .iter()
                .enumerate()
                .filter(|(_, l)| eligible(l, approach))
                .map(move |(li, _)| (vi, li))
        })
        .collect();
    if wanted.is_empty() {
        return Ok(Vec::new());
    }
    let fail = |e: LightError| SceneError {
        scene_id: scene.scene_id.clone(),
        message: e.to_string(),
    };
    let image = images.load(&scene.image_path).map_err(fail)?;
    debug!("scene {}: {} light(s)", scene.scene_id, wanted.len());
    wanted
        .into_iter()
        .map(|(vi, li)| curate_light(scene, &image, &scene.vehicles[vi], li, approach).map_err(fail))
        .collect()
}

fn sample_order(a: &SampleRecord, b: &SampleRecord) -> Ordering {
    // unknown positions sort after the four known ones
    let pos_key = |r: &SampleRecord| r.position.map_or(4, |p| p.index());
    a.scene_id
        .cmp(&b.scene_id)
        .then_with(|| a.vehicle_id.cmp(&b.vehicle_id))
        .then_with(|| pos_key(a).cmp(&pos_key(b)))
        .then_with(|| a.light_index.cmp(&b.light_index))
}

/// Produces one sample per visible light that has a center.
///
/// A scene whose image cannot be read is recorded in `errors` and skipped.
/// Output order does not depend on the worker count.
pub fn curate(
    scenes: &[SceneAnnotation],
    options: &CurateOptions,
    images: &dyn ImageSource,
    source: &str,
) -> Result<DatasetManifest> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers)
        .build()
        .map_err(|e| LightError::invalid(format!("worker pool: {e}")))?;
    let per_scene: Vec<_> = pool.install(|| {
        scenes
            .par_iter()
            .map(|s| curate_scene(s, options.approach, images))
            .collect()
    });

    let mut samples = Vec::new();
    let mut errors = Vec::new();
    for r in per_scene {
        match r {
            Ok(s) => samples.extend(s),
            Err(e) => {
                warn!("scene {}: {}", e.scene_id, e.message);
                errors.push(e);
            }
        }
    }
    samples.sort_by(|a, b| sample_order(&a.record, &b.record));
    errors.sort_by(|a, b| a.scene_id.cmp(&b.scene_id));
    Ok(DatasetManifest {
        provenance: Provenance {
            approach: options.approach,
            source: source.to_string(),
            augmentations: Vec::new(),
        },
        samples,
        errors,
    })
}

/// Follows every sample with its horizontal reflection.
pub fn augment_reflect(manifest: &DatasetManifest) -> DatasetManifest {
    let mut samples = Vec::with_capacity(manifest.samples.len() * 2);
    for s in &manifest.samples {
        samples.push(s.clone());
        samples.push(super::sample::reflect_sample(s));
    }
    let mut provenance = manifest.provenance.clone();
    provenance.augmentations.push("reflect".to_string());
    DatasetManifest {
        provenance,
        samples,
        errors: manifest.errors.clone(),
    }
}
