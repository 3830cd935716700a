use serde::Serialize;

use crate::annotation::{SceneAnnotation, SegmentationOptions};
use crate::geometry::{bbox_of_mask, connected_components, largest_component};
use crate::io::MaskSource;

/// A mask annotation that could not be converted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnnotationError {
    pub scene_id: String,
    pub vehicle_id: String,
    pub light_index: usize,
    pub mask_ref: String,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct MaskConversion {
    pub scenes: Vec<SceneAnnotation>,
    pub converted: usize,
    pub dropped: usize,
    pub errors: Vec<AnnotationError>,
}

/// Gives every mask-only light a box from its largest connected component.
///
/// Lights whose component is below `min_area` are dropped. Lights that
/// already carry a box are left untouched; unreadable masks are reported
/// and the annotation kept as is.
pub fn convert_mask_annotations_to_boxes(
    scenes: &[SceneAnnotation],
    masks: &dyn MaskSource,
    options: &SegmentationOptions,
) -> MaskConversion {
    let mut out = MaskConversion::default();
    for scene in scenes {
        let mut scene = scene.clone();
        for vehicle in &mut scene.vehicles {
            let mut kept = Vec::with_capacity(vehicle.lights.len());
            for (li, mut light) in std::mem::take(&mut vehicle.lights).into_iter().enumerate() {
                let Some(mask_ref) = light.mask_ref.clone().filter(|_| light.bbox.is_none()) else {
                    kept.push(light);
                    continue;
                };
                let mut report = |message: String| {
                    out.errors.push(AnnotationError {
                        scene_id: scene.scene_id.clone(),
                        vehicle_id: vehicle.vehicle_id.clone(),
                        light_index: li,
                        mask_ref: mask_ref.clone(),
                        message,
                    })
                };
                let mask = match masks.load(&mask_ref) {
                    Ok(m) => m,
                    Err(e) => {
                        report(e.to_string());
                        kept.push(light);
                        continue;
                    }
                };
                if mask.width() != scene.width as usize || mask.height() != scene.height as usize {
                    report(format!(
                        "mask is {}x{} but image is {}x{}",
                        mask.width(),
                        mask.height(),
                        scene.width,
                        scene.height
                    ));
                    kept.push(light);
                    continue;
                }
                let labeled = connected_components(&mask, options.connectivity);
                match bbox_of_mask(&largest_component(&labeled, options.min_area)) {
                    Ok(b) => {
                        light.bbox = Some(b);
                        out.converted += 1;
                        kept.push(light);
                    }
                    Err(_) => out.dropped += 1,
                }
            }
            vehicle.lights = kept;
        }
        out.scenes.push(scene);
    }
    out
}
