//! Importers for keypoint-style and segmentation-style source datasets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{LightAnnotation, LightPosition, Rule, SceneAnnotation, VehicleInstance, Violation};
use crate::error::{LightError, Result};
use crate::geometry::{
    bbox_of_mask, connected_components, BinaryMask, BoxTlbr, Connectivity, CornerRole, CornerSet,
    PixelPoint,
};

/// What a source keypoint id denotes for a light.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KeypointRole {
    Ul,
    Ur,
    Bl,
    Br,
    Center,
}

impl KeypointRole {
    fn corner(self) -> Option<CornerRole> {
        match self {
            KeypointRole::Ul => Some(CornerRole::UpperLeft),
            KeypointRole::Ur => Some(CornerRole::UpperRight),
            KeypointRole::Bl => Some(CornerRole::BottomLeft),
            KeypointRole::Br => Some(CornerRole::BottomRight),
            KeypointRole::Center => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingEntry {
    pub id: u32,
    pub position: LightPosition,
    pub role: KeypointRole,
}

/// Table from source keypoint ids to light position and role.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeypointMapping {
    entries: BTreeMap<u32, (LightPosition, KeypointRole)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MappingFile {
    keypoints: Vec<MappingEntry>,
}

impl KeypointMapping {
    pub fn new(entries: impl IntoIterator<Item = MappingEntry>) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut targets = BTreeMap::new();
        for e in entries {
            if map.insert(e.id, (e.position, e.role)).is_some() {
                return Err(LightError::invalid(format!("keypoint id {} mapped twice", e.id)));
            }
            if let Some(prev) = targets.insert((e.position, e.role), e.id) {
                return Err(LightError::invalid(format!(
                    "keypoint ids {prev} and {} both map to {} {:?}",
                    e.id, e.position, e.role
                )));
            }
        }
        Ok(Self { entries: map })
    }

    /// Built-in layout: five consecutive ids per position in the order
    /// front-left, front-right, rear-left, rear-right, each as
    /// `ul, ur, bl, br, center`. Ids 0..=19.
    pub fn default_layout() -> Self {
        let roles = [
            KeypointRole::Ul,
            KeypointRole::Ur,
            KeypointRole::Bl,
            KeypointRole::Br,
            KeypointRole::Center,
        ];
        let entries = LightPosition::ALL.iter().enumerate().flat_map(|(pi, &position)| {
            roles.iter().enumerate().map(move |(ri, &role)| MappingEntry {
                id: (pi * roles.len() + ri) as u32,
                position,
                role,
            })
        });
        Self::new(entries).expect("default layout is unique")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MappingFile = serde_json::from_str(text).map_err(|e| LightError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Self::new(file.keypoints)
    }

    pub fn to_json(&self) -> String {
        super::canonical_json(&MappingFile {
            keypoints: self.entries(),
        })
    }

    pub fn entries(&self) -> Vec<MappingEntry> {
        self.entries
            .iter()
            .map(|(&id, &(position, role))| MappingEntry { id, position, role })
            .collect()
    }

    pub fn get(&self, id: u32) -> Option<(LightPosition, KeypointRole)> {
        self.entries.get(&id).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawKeypoint {
    pub id: u32,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeypointVehicle {
    pub vehicle_id: String,
    pub bbox: BoxTlbr,
    #[serde(default)]
    pub keypoints: Vec<RawKeypoint>,
}

/// One source image with per-vehicle keypoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeypointRecord {
    pub scene_id: String,
    pub image_path: String,
    pub width: u32,
    pub height: u32,
    pub vehicles: Vec<KeypointVehicle>,
}

/// Converts keypoint records into scenes.
///
/// Every vehicle gets one annotation per position. A position with at least
/// one mapped keypoint is visible and carries a four-role corner set (absent
/// corners flagged false) plus the center keypoint when present; a position
/// with none is tagged not visible. Unmapped keypoint ids are ignored.
pub fn import_keypoint_dataset(
    records: &[KeypointRecord],
    mapping: &KeypointMapping,
) -> Result<Vec<SceneAnnotation>> {
    let mut scenes = Vec::with_capacity(records.len());
    let mut out_of_bounds = Vec::new();
    for rec in records {
        let bounds = BoxTlbr::from_coords(0.0, 0.0, rec.width as f64, rec.height as f64);
        let mut vehicles = Vec::with_capacity(rec.vehicles.len());
        for veh in &rec.vehicles {
            let mut slots: BTreeMap<LightPosition, [Option<PixelPoint>; 5]> = BTreeMap::new();
            for kp in &veh.keypoints {
                let Some((position, role)) = mapping.get(kp.id) else {
                    continue;
                };
                let p = PixelPoint::new(kp.x, kp.y);
                if !p.is_finite() || !bounds.contains(&p) {
                    out_of_bounds.push(Violation {
                        scene_id: rec.scene_id.clone(),
                        vehicle_id: Some(veh.vehicle_id.clone()),
                        light: Some(position.as_str().to_string()),
                        rule: Rule::OutOfImage,
                        detail: format!(
                            "keypoint {} at ({}, {}) outside {}x{} image",
                            kp.id, kp.x, kp.y, rec.width, rec.height
                        ),
                    });
                    continue;
                }
                let slot_index = role.corner().map_or(4, CornerRole::index);
                let slot = &mut slots.entry(position).or_default()[slot_index];
                if slot.is_some() {
                    return Err(LightError::Conflict {
                        scene_id: rec.scene_id.clone(),
                        vehicle_id: veh.vehicle_id.clone(),
                        detail: format!(
                            "keypoint {} fills {} {:?}, which is already set",
                            kp.id, position, role
                        ),
                    });
                }
                *slot = Some(p);
            }

            let lights = LightPosition::ALL
                .iter()
                .map(|&position| match slots.get(&position) {
                    None => LightAnnotation::hidden(position),
                    Some(s) => {
                        let corners = s[..4].to_vec();
                        let flags = corners.iter().map(Option::is_some).collect();
                        LightAnnotation {
                            position: Some(position),
                            visible: true,
                            center: s[4],
                            corners: Some(CornerSet {
                                corners,
                                visible: flags,
                            }),
                            bbox: None,
                            mask_ref: None,
                        }
                    }
                })
                .collect();
            vehicles.push(VehicleInstance {
                vehicle_id: veh.vehicle_id.clone(),
                bbox: veh.bbox,
                lights,
            });
        }
        scenes.push(SceneAnnotation {
            scene_id: rec.scene_id.clone(),
            image_path: rec.image_path.clone(),
            width: rec.width,
            height: rec.height,
            vehicles,
        });
    }
    if !out_of_bounds.is_empty() {
        return Err(LightError::Validation(out_of_bounds));
    }
    Ok(scenes)
}

/// Vehicle id of the pseudo-vehicle spanning the whole image that holds
/// segmentation-derived lights.
pub const SEGMENTATION_VEHICLE_ID: &str = "scene";

/// A source image with its light segmentation.
#[derive(Debug, Clone)]
pub struct SegmentationFrame {
    pub scene_id: String,
    pub image_path: String,
    pub image_width: u32,
    pub image_height: u32,
    pub mask: BinaryMask,
    /// Reference stored on each emitted annotation.
    pub mask_ref: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentationOptions {
    pub min_area: usize,
    pub connectivity: Connectivity,
}

impl Default for SegmentationOptions {
    fn default() -> Self {
        Self {
            min_area: 4,
            connectivity: Connectivity::Eight,
        }
    }
}

/// Turns each sufficiently large connected component of each mask into a
/// box annotation of unknown position.
///
/// The source carries no vehicle information, so the lights hang off a
/// single pseudo-vehicle covering the image.
pub fn import_segmentation_dataset(
    frames: &[SegmentationFrame],
    options: &SegmentationOptions,
) -> Result<Vec<SceneAnnotation>> {
    let mismatched: Vec<Violation> = frames
        .iter()
        .filter(|f| {
            f.mask.width() != f.image_width as usize || f.mask.height() != f.image_height as usize
        })
        .map(|f| Violation {
            scene_id: f.scene_id.clone(),
            vehicle_id: None,
            light: None,
            rule: Rule::MaskDimensionMismatch,
            detail: format!(
                "mask is {}x{} but image is {}x{}",
                f.mask.width(),
                f.mask.height(),
                f.image_width,
                f.image_height
            ),
        })
        .collect();
    if !mismatched.is_empty() {
        return Err(LightError::Validation(mismatched));
    }

    Ok(frames
        .iter()
        .map(|f| {
            let labeled = connected_components(&f.mask, options.connectivity);
            let lights = (1..=labeled.num_components() as u32)
                .filter(|&l| labeled.component_size(l) >= options.min_area)
                .map(|l| LightAnnotation {
                    position: None,
                    visible: true,
                    center: None,
                    corners: None,
                    bbox: Some(
                        bbox_of_mask(&labeled.component_mask(l)).expect("component is non-empty"),
                    ),
                    mask_ref: Some(f.mask_ref.clone()),
                })
                .collect();
            SceneAnnotation {
                scene_id: f.scene_id.clone(),
                image_path: f.image_path.clone(),
                width: f.image_width,
                height: f.image_height,
                vehicles: vec![VehicleInstance {
                    vehicle_id: SEGMENTATION_VEHICLE_ID.to_string(),
                    bbox: BoxTlbr::from_coords(0.0, 0.0, f.image_width as f64, f.image_height as f64),
                    lights,
                }],
            }
        })
        .collect())
}
