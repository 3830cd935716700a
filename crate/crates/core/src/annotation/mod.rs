//! Canonical scene / vehicle / light annotation schema.

mod import;
mod validate;

pub use import::{
    import_keypoint_dataset, import_segmentation_dataset, KeypointMapping, KeypointRecord,
    KeypointRole, KeypointVehicle, MappingEntry, RawKeypoint, SegmentationFrame,
    SegmentationOptions, SEGMENTATION_VEHICLE_ID,
};
pub use validate::{validate, validate_with, Rule, ValidationOptions, Violation};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{LightError, Result};
use crate::geometry::{BoxTlbr, CornerRole, CornerSet, PixelPoint};

pub const SCHEMA_VERSION: u32 = 1;

/// Which of a vehicle's four light assemblies an annotation describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LightPosition {
    FrontLeft,
    FrontRight,
    RearLeft,
    RearRight,
}

impl LightPosition {
    pub const ALL: [LightPosition; 4] = [
        LightPosition::FrontLeft,
        LightPosition::FrontRight,
        LightPosition::RearLeft,
        LightPosition::RearRight,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LightPosition::FrontLeft => "front-left",
            LightPosition::FrontRight => "front-right",
            LightPosition::RearLeft => "rear-left",
            LightPosition::RearRight => "rear-right",
        }
    }

    /// Display name in title case, e.g. `Rear-Left`.
    pub fn title(self) -> &'static str {
        match self {
            LightPosition::FrontLeft => "Front-Left",
            LightPosition::FrontRight => "Front-Right",
            LightPosition::RearLeft => "Rear-Left",
            LightPosition::RearRight => "Rear-Right",
        }
    }

    /// Position after a horizontal reflection of the image.
    pub fn mirrored(self) -> Self {
        match self {
            LightPosition::FrontLeft => LightPosition::FrontRight,
            LightPosition::FrontRight => LightPosition::FrontLeft,
            LightPosition::RearLeft => LightPosition::RearRight,
            LightPosition::RearRight => LightPosition::RearLeft,
        }
    }
}

impl fmt::Display for LightPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LightPosition {
    type Err = LightError;

    fn from_str(s: &str) -> Result<Self> {
        LightPosition::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| LightError::invalid(format!("unknown light position '{s}'")))
    }
}

pub const UNKNOWN_POSITION: &str = "unknown";

/// Label for an optional position; `None` is the unknown-position sentinel.
pub fn position_label(p: Option<LightPosition>) -> &'static str {
    p.map_or(UNKNOWN_POSITION, LightPosition::as_str)
}

pub(crate) mod optional_position {
    use super::*;

    pub fn serialize<S: Serializer>(
        p: &Option<LightPosition>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(position_label(*p))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<LightPosition>, D::Error> {
        let s = String::deserialize(d)?;
        if s == UNKNOWN_POSITION {
            return Ok(None);
        }
        s.parse().map(Some).map_err(serde::de::Error::custom)
    }
}

/// Wire form of a four-role corner set.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CornersWire {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ul: Option<PixelPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ur: Option<PixelPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bl: Option<PixelPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    br: Option<PixelPoint>,
    flags: [bool; 4],
}

mod light_corners {
    use super::*;

    pub fn serialize<S: Serializer>(
        c: &Option<CornerSet>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let c = c.as_ref().expect("skipped when None");
        if c.len() != 4 || c.visible.len() != 4 {
            return Err(serde::ser::Error::custom(
                "light corner sets must have exactly four corners",
            ));
        }
        let get = |r: CornerRole| c.corners[r.index()];
        CornersWire {
            ul: get(CornerRole::UpperLeft),
            ur: get(CornerRole::UpperRight),
            bl: get(CornerRole::BottomLeft),
            br: get(CornerRole::BottomRight),
            flags: [c.visible[0], c.visible[1], c.visible[2], c.visible[3]],
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<CornerSet>, D::Error> {
        let w = CornersWire::deserialize(d)?;
        // flag/coordinate consistency is left to the validator
        Ok(Some(CornerSet {
            corners: vec![w.ul, w.ur, w.bl, w.br],
            visible: w.flags.to_vec(),
        }))
    }
}

/// One light assembly of a vehicle, in any subset of the representations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LightAnnotation {
    #[serde(with = "optional_position")]
    pub position: Option<LightPosition>,
    pub visible: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<PixelPoint>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "light_corners"
    )]
    pub corners: Option<CornerSet>,
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub bbox: Option<BoxTlbr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_ref: Option<String>,
}

impl LightAnnotation {
    /// A light tagged not visible, with no geometry.
    pub fn hidden(position: LightPosition) -> Self {
        Self {
            position: Some(position),
            visible: false,
            center: None,
            corners: None,
            bbox: None,
            mask_ref: None,
        }
    }

    pub fn has_representation(&self) -> bool {
        self.center.is_some()
            || self.corners.as_ref().is_some_and(|c| c.any_visible())
            || self.bbox.is_some()
            || self.mask_ref.is_some()
    }

    /// Every coordinate carried by the annotation.
    pub fn coordinates(&self) -> Vec<PixelPoint> {
        let mut out = Vec::new();
        out.extend(self.center);
        if let Some(c) = &self.corners {
            out.extend(c.corners.iter().flatten());
        }
        if let Some(b) = &self.bbox {
            out.push(b.top_left);
            out.push(b.bottom_right);
        }
        out
    }

    /// Light center: the annotated center, else the centroid of the visible
    /// corners, else the centroid of the box corners.
    pub fn resolved_center(&self) -> Option<PixelPoint> {
        if self.center.is_some() {
            return self.center;
        }
        if let Some(c) = &self.corners {
            let pts = c.visible_points();
            if !pts.is_empty() {
                return crate::geometry::centroid(&pts).ok();
            }
        }
        self.bbox.map(|b| {
            crate::geometry::centroid(&b.corners()).expect("four corners")
        })
    }

    /// Light box: the annotated box, else the extent of the visible corners.
    pub fn resolved_box(&self) -> Option<BoxTlbr> {
        if self.bbox.is_some() {
            return self.bbox;
        }
        let pts = self.corners.as_ref()?.visible_points();
        crate::geometry::bbox_of_points(&pts).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleInstance {
    pub vehicle_id: String,
    pub bbox: BoxTlbr,
    pub lights: Vec<LightAnnotation>,
}

impl VehicleInstance {
    pub fn light(&self, position: LightPosition) -> Option<&LightAnnotation> {
        self.lights.iter().find(|l| l.position == Some(position))
    }

    /// Per-position visible tags, ordered front-left, front-right, rear-left, rear-right.
    pub fn visibility(&self) -> [bool; 4] {
        LightPosition::ALL.map(|p| self.light(p).is_some_and(|l| l.visible))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneAnnotation {
    pub scene_id: String,
    pub image_path: String,
    pub width: u32,
    pub height: u32,
    pub vehicles: Vec<VehicleInstance>,
}

impl SceneAnnotation {
    pub fn bounds(&self) -> BoxTlbr {
        BoxTlbr::from_coords(0.0, 0.0, self.width as f64, self.height as f64)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDocument {
    schema_version: u32,
    scenes: Vec<SceneAnnotation>,
}

/// Parses a canonical scene document and validates it with default options.
pub fn parse_scenes(document: &str) -> Result<Vec<SceneAnnotation>> {
    parse_scenes_with(document, &ValidationOptions::default())
}

pub fn parse_scenes_with(document: &str, options: &ValidationOptions) -> Result<Vec<SceneAnnotation>> {
    let scenes = parse_scenes_unchecked(document)?;
    let violations = validate_with(&scenes, options);
    if violations.is_empty() {
        Ok(scenes)
    } else {
        Err(LightError::Validation(violations))
    }
}

/// Parses without running the validator.
pub fn parse_scenes_unchecked(document: &str) -> Result<Vec<SceneAnnotation>> {
    let doc: SceneDocument = serde_json::from_str(document).map_err(|e| LightError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(LightError::Parse {
            line: 1,
            column: 1,
            message: format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                doc.schema_version
            ),
        });
    }
    Ok(doc.scenes)
}

/// Canonical text: sorted keys, shortest round-trip numbers, two-space
/// indentation and a trailing newline.
pub fn serialize_scenes(scenes: &[SceneAnnotation]) -> String {
    let doc = SceneDocument {
        schema_version: SCHEMA_VERSION,
        scenes: scenes.to_vec(),
    };
    canonical_json(&doc)
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    // serde_json::Value keeps object keys in a BTreeMap, which sorts them
    let v = serde_json::to_value(value).expect("annotation types always serialize");
    let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
    s.push('\n');
    s
}

/// Single-line JSON with sorted keys.
pub fn canonical_line<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("record types always serialize");
    serde_json::to_string(&v).expect("value serializes")
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) const MINIMAL: &str = r#"{
  "schema_version": 1,
  "scenes": [
    {
      "scene_id": "s1",
      "image_path": "s1.png",
      "width": 200,
      "height": 100,
      "vehicles": [
        {
          "vehicle_id": "v1",
          "bbox": [10, 10, 110, 90],
          "lights": [
            {"position": "rear-left", "visible": true, "center": [30, 50]}
          ]
        }
      ]
    }
  ]
}"#;

    #[test]
    fn minimal_document_parses() {
        let scenes = parse_scenes(MINIMAL).unwrap();
        assert_eq!(scenes.len(), 1);
        let light = &scenes[0].vehicles[0].lights[0];
        assert_eq!(light.position, Some(LightPosition::RearLeft));
        assert_eq!(light.center, Some(PixelPoint::new(30.0, 50.0)));
    }

    #[test]
    fn duplicate_position_names_vehicle() {
        let doc = MINIMAL.replace(
            r#"{"position": "rear-left", "visible": true, "center": [30, 50]}"#,
            r#"{"position": "rear-left", "visible": true, "center": [30, 50]},
               {"position": "rear-left", "visible": true, "center": [40, 50]}"#,
        );
        match parse_scenes(&doc) {
            Err(LightError::Validation(v)) => {
                assert_eq!(v.len(), 1);
                assert_eq!(v[0].vehicle_id.as_deref(), Some("v1"));
                assert_eq!(v[0].rule, Rule::DuplicatePosition);
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn empty_scene_list() {
        let scenes = parse_scenes(r#"{"schema_version": 1, "scenes": []}"#).unwrap();
        assert!(scenes.is_empty());
        assert_eq!(
            serialize_scenes(&[]),
            "{\n  \"scenes\": [],\n  \"schema_version\": 1\n}\n"
        );
    }

    #[test]
    fn malformed_document_reports_location() {
        let err = parse_scenes("{\"schema_version\": 1,\n \"scenes\": [ {\"scene_id\": 3} ]}")
            .unwrap_err();
        match err {
            LightError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_scenes(r#"{"schema_version": 7, "scenes": []}"#).is_err());
    }

    #[test]
    fn serialization_is_canonical_and_stable() {
        let scenes = parse_scenes(MINIMAL).unwrap();
        let a = serialize_scenes(&scenes);
        let b = serialize_scenes(&parse_scenes(&a).unwrap());
        assert_eq!(a, b);
        assert_eq!(parse_scenes(&a).unwrap(), scenes);
        // keys sorted
        assert!(a.find("\"height\"").unwrap() < a.find("\"image_path\"").unwrap());
    }

    #[test]
    fn corners_wire_form() {
        let light = LightAnnotation {
            position: None,
            visible: true,
            center: None,
            corners: Some(
                CornerSet::new(
                    vec![Some(PixelPoint::new(1.0, 2.0)), None, None, Some(PixelPoint::new(3.5, 4.0))],
                    vec![true, false, false, true],
                )
                .unwrap(),
            ),
            bbox: None,
            mask_ref: None,
        };
        let text = canonical_line(&light);
        assert_eq!(
            text,
            r#"{"corners":{"br":[3.5,4.0],"flags":[true,false,false,true],"ul":[1.0,2.0]},"position":"unknown","visible":true}"#
        );
        let back: LightAnnotation = serde_json::from_str(&text).unwrap();
        assert_eq!(back, light);
    }

    #[test]
    fn position_mirror_is_involution() {
        for p in LightPosition::ALL {
            assert_ne!(p.mirrored(), p);
            assert_eq!(p.mirrored().mirrored(), p);
        }
    }

    fn arb_point(w: f64, h: f64) -> impl Strategy<Value = PixelPoint> {
        (0.0..w, 0.0..h).prop_map(|(x, y)| PixelPoint::new(x, y))
    }

    fn arb_light(position: LightPosition) -> impl Strategy<Value = LightAnnotation> {
        (
            any::<bool>(),
            proptest::option::of(arb_point(100.0, 80.0)),
            proptest::collection::vec(proptest::option::of(arb_point(100.0, 80.0)), 4),
        )
            .prop_map(move |(visible, center, corners)| {
                let flags: Vec<bool> = corners.iter().map(|c| c.is_some()).collect();
                LightAnnotation {
                    position: Some(position),
                    visible,
                    center,
                    corners: Some(CornerSet { corners, visible: flags }),
                    bbox: None,
                    mask_ref: None,
                }
            })
    }

    pub(crate) fn arb_scenes() -> impl Strategy<Value = Vec<SceneAnnotation>> {
        proptest::collection::vec(
            proptest::collection::vec(
                (arb_light(LightPosition::FrontLeft), arb_light(LightPosition::RearRight)),
                0..3,
            ),
            0..3,
        )
        .prop_map(|scenes| {
            scenes
                .into_iter()
                .enumerate()
                .map(|(si, vehicles)| SceneAnnotation {
                    scene_id: format!("scene{si}"),
                    image_path: format!("scene{si}.png"),
                    width: 100,
                    height: 80,
                    vehicles: vehicles
                        .into_iter()
                        .enumerate()
                        .map(|(vi, (a, b))| VehicleInstance {
                            vehicle_id: format!("v{vi}"),
                            bbox: BoxTlbr::from_coords(0.0, 0.0, 100.0, 80.0),
                            lights: vec![a, b],
                        })
                        .collect(),
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn parse_inverts_serialize(scenes in arb_scenes()) {
            let text = serialize_scenes(&scenes);
            let back = parse_scenes_unchecked(&text).unwrap();
            prop_assert_eq!(&back, &scenes);
            prop_assert_eq!(serialize_scenes(&back), text);
        }
    }
}
