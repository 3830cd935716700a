use image::RgbImage;
use serde::{Deserialize, Serialize};

use super::crop::{Padding, HALF_CROP};
use crate::annotation::{optional_position, LightPosition};
use crate::geometry::{CornerRole, CornerSet, PixelPoint};

/// How much of the source raster surrounds a light crop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CropApproach {
    /// Crop the vehicle first, then the light from the vehicle crop.
    VehicleOnly,
    /// Crop the light directly from the full scene.
    SceneContext,
}

impl CropApproach {
    pub fn as_str(self) -> &'static str {
        match self {
            CropApproach::VehicleOnly => "vehicle-only",
            CropApproach::SceneContext => "scene-context",
        }
    }
}

impl std::str::FromStr for CropApproach {
    type Err = crate::LightError;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "vehicle-only" => Ok(CropApproach::VehicleOnly),
            "scene-context" => Ok(CropApproach::SceneContext),
            other => Err(crate::LightError::invalid(format!(
                "unknown crop approach '{other}'"
            ))),
        }
    }
}

/// Normalized corner offsets with visibility, in UL, UR, BL, BR order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetTargets {
    /// `[x'1, y'1, x'2, y'2, x'3, y'3, x'4, y'4]`
    pub offsets: [f64; 8],
    pub visible: [bool; 4],
    /// Some visible corner lay more than 64 px from the center and was clamped.
    pub clipped: bool,
}

/// `(corner - center) / 64` per visible corner; hidden corners get `(0, 0)`.
///
/// `corners` are in the crop-local frame; `center_local` is normally `(64, 64)`.
pub fn corner_offset_targets(corners: &CornerSet, center_local: PixelPoint) -> OffsetTargets {
    let mut out = OffsetTargets {
        offsets: [0.0; 8],
        visible: [false; 4],
        clipped: false,
    };
    let scale = HALF_CROP as f64;
    for role in CornerRole::ALL {
        let i = role.index();
        let Some(p) = corners.get(role).filter(|_| corners.is_visible(role)) else {
            continue;
        };
        for (k, d) in [(p.x - center_local.x) / scale, (p.y - center_local.y) / scale]
            .into_iter()
            .enumerate()
        {
            if !(-1.0..=1.0).contains(&d) {
                out.clipped = true;
            }
            // + 0.0 folds a negative zero into the sentinel's positive zero
            out.offsets[2 * i + k] = d.clamp(-1.0, 1.0) + 0.0;
        }
        out.visible[i] = true;
    }
    out
}

/// Sample metadata as stored in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample_id: String,
    pub scene_id: String,
    pub vehicle_id: String,
    #[serde(with = "optional_position")]
    pub position: Option<LightPosition>,
    /// Index of the light within its vehicle's annotation list.
    pub light_index: usize,
    pub approach: CropApproach,
    /// Rounded light center in the scene frame.
    pub center: [i64; 2],
    pub pad: Padding,
    pub offsets: [f64; 8],
    pub corner_visible: [bool; 4],
    pub clipped: bool,
    pub reflected: bool,
    /// Crop PNG relative to the manifest directory; assigned when written.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub crop_path: String,
}

impl SampleRecord {
    /// Horizontal extent `(width, height)` of the visible corners in pixels.
    /// An axis needs two visible corners to be measurable.
    pub fn light_extent(&self) -> (Option<f64>, Option<f64>) {
        let scale = HALF_CROP as f64;
        let axis = |k: usize| {
            let vals: Vec<f64> = (0..4)
                .filter(|&i| self.corner_visible[i])
                .map(|i| self.offsets[2 * i + k] * scale)
                .collect();
            (vals.len() >= 2).then(|| {
                let max = vals.iter().copied().fold(f64::MIN, f64::max);
                let min = vals.iter().copied().fold(f64::MAX, f64::min);
                max - min
            })
        };
        (axis(0), axis(1))
    }
}

/// A curated light crop with its targets.
#[derive(Debug, Clone, PartialEq)]
pub struct CuratedSample {
    pub record: SampleRecord,
    pub crop: RgbImage,
}

const REFLECTED_SUFFIX: &str = "+flip";

fn negate(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        -v
    }
}

/// Mirrors a sample left to right.
///
/// The raster reverses its columns; each x offset is negated and the
/// UL/UR and BL/BR roles swap (flags with them); the position label swaps
/// left and right. Applying it twice restores the sample exactly.
pub fn reflect_sample(s: &CuratedSample) -> CuratedSample {
    let r = &s.record;
    let mut offsets = [0.0; 8];
    let mut visible = [false; 4];
    for role in CornerRole::ALL {
        let (src, dst) = (role.index(), role.mirrored().index());
        offsets[2 * dst] = negate(r.offsets[2 * src]);
        offsets[2 * dst + 1] = r.offsets[2 * src + 1];
        visible[dst] = r.corner_visible[src];
    }
    let sample_id = match r.sample_id.strip_suffix(REFLECTED_SUFFIX) {
        Some(base) => base.to_string(),
        None => format!("{}{REFLECTED_SUFFIX}", r.sample_id),
    };
    CuratedSample {
        record: SampleRecord {
            sample_id,
            position: r.position.map(LightPosition::mirrored),
            pad: r.pad.mirrored(),
            offsets,
            corner_visible: visible,
            reflected: !r.reflected,
            ..r.clone()
        },
        crop: image::imageops::flip_horizontal(&s.crop),
    }
}
