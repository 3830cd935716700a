use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use super::{position_label, SceneAnnotation};
use crate::geometry::PixelPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    DuplicateSceneId,
    DuplicateVehicleId,
    InvalidBox,
    BoxOutOfImage,
    DuplicatePosition,
    MissingRepresentation,
    InvalidCorners,
    InvalidCoordinate,
    OutOfImage,
    OutsideVehicle,
    MaskDimensionMismatch,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::DuplicateSceneId => "duplicate-scene-id",
            Rule::DuplicateVehicleId => "duplicate-vehicle-id",
            Rule::InvalidBox => "invalid-box",
            Rule::BoxOutOfImage => "box-out-of-image",
            Rule::DuplicatePosition => "duplicate-position",
            Rule::MissingRepresentation => "missing-representation",
            Rule::InvalidCorners => "invalid-corners",
            Rule::InvalidCoordinate => "invalid-coordinate",
            Rule::OutOfImage => "out-of-image",
            Rule::OutsideVehicle => "outside-vehicle",
            Rule::MaskDimensionMismatch => "mask-dimension-mismatch",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub scene_id: String,
    pub vehicle_id: Option<String>,
    /// Position label of the light, suffixed with its index for unknown positions.
    pub light: Option<String>,
    pub rule: Rule,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "scene {}", self.scene_id)?;
        if let Some(v) = &self.vehicle_id {
            write!(f, ", vehicle {v}")?;
        }
        if let Some(l) = &self.light {
            write!(f, ", light {l}")?;
        }
        write!(f, ": [{}] {}", self.rule.as_str(), self.detail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    /// Margin around the vehicle box, as a fraction of its width, inside
    /// which visible light coordinates must fall.
    pub vehicle_slack: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            vehicle_slack: 0.05,
        }
    }
}

pub fn validate(scenes: &[SceneAnnotation]) -> Vec<Violation> {
    validate_with(scenes, &ValidationOptions::default())
}

/// Checks every schema invariant; an empty result means the scenes are valid.
pub fn validate_with(scenes: &[SceneAnnotation], options: &ValidationOptions) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut scene_ids = HashSet::new();
    for scene in scenes {
        let scene_v = |rule, detail: String| Violation {
            scene_id: scene.scene_id.clone(),
            vehicle_id: None,
            light: None,
            rule,
            detail,
        };
        if !scene_ids.insert(scene.scene_id.as_str()) {
            out.push(scene_v(Rule::DuplicateSceneId, "scene id repeated".into()));
        }
        let bounds = scene.bounds();
        let mut vehicle_ids = HashSet::new();
        for vehicle in &scene.vehicles {
            let vehicle_v = |rule, detail: String| Violation {
                vehicle_id: Some(vehicle.vehicle_id.clone()),
                ..scene_v(rule, detail)
            };
            if !vehicle_ids.insert(vehicle.vehicle_id.as_str()) {
                out.push(vehicle_v(Rule::DuplicateVehicleId, "vehicle id repeated".into()));
            }
            let vb = vehicle.bbox;
            if !vb.is_valid() {
                out.push(vehicle_v(
                    Rule::InvalidBox,
                    format!("vehicle bbox {:?} is not ordered", vb.to_array()),
                ));
            } else if !(bounds.contains(&vb.top_left) && bounds.contains(&vb.bottom_right)) {
                out.push(vehicle_v(
                    Rule::BoxOutOfImage,
                    format!(
                        "vehicle bbox {:?} exceeds {}x{} image",
                        vb.to_array(),
                        scene.width,
                        scene.height
                    ),
                ));
            }
            let slack_region = vb.is_valid().then(|| vb.expand(vb.width() * options.vehicle_slack));

            let mut positions = HashSet::new();
            for (li, light) in vehicle.lights.iter().enumerate() {
                let name = match light.position {
                    Some(p) => p.as_str().to_string(),
                    None => format!("{}#{li}", position_label(None)),
                };
                let light_v = |rule, detail: String| Violation {
                    light: Some(name.clone()),
                    ..vehicle_v(rule, detail)
                };
                if let Some(p) = light.position {
                    if !positions.insert(p) {
                        out.push(light_v(
                            Rule::DuplicatePosition,
                            format!("position {p} annotated more than once"),
                        ));
                    }
                }
                if light.visible && !light.has_representation() {
                    out.push(light_v(
                        Rule::MissingRepresentation,
                        "visible light carries no center, corners, box or mask".into(),
                    ));
                }
                if let Some(c) = &light.corners {
                    let arity_ok = c.len() == 4 && c.visible.len() == 4;
                    if !arity_ok {
                        out.push(light_v(
                            Rule::InvalidCorners,
                            format!("expected 4 corners and 4 flags, got {} and {}", c.len(), c.visible.len()),
                        ));
                    } else if let Err(e) = c.check() {
                        out.push(light_v(Rule::InvalidCorners, e.to_string()));
                    }
                }
                if let Some(b) = &light.bbox {
                    if !b.is_valid() {
                        out.push(light_v(
                            Rule::InvalidBox,
                            format!("light box {:?} is not ordered", b.to_array()),
                        ));
                    }
                }
                let coords = light.coordinates();
                if let Some(bad) = coords.iter().find(|p| !p.is_finite()) {
                    out.push(light_v(
                        Rule::InvalidCoordinate,
                        format!("non-finite coordinate ({}, {})", bad.x, bad.y),
                    ));
                    continue;
                }
                if let Some(p) = coords.iter().find(|p| !bounds.contains(p)) {
                    out.push(light_v(
                        Rule::OutOfImage,
                        format!(
                            "coordinate ({}, {}) outside {}x{} image",
                            p.x, p.y, scene.width, scene.height
                        ),
                    ));
                }
                if light.visible {
                    if let Some(region) = slack_region {
                        let checked = visible_coordinates(light);
                        if let Some(p) = checked.iter().find(|p| !region.contains(p)) {
                            out.push(light_v(
                                Rule::OutsideVehicle,
                                format!(
                                    "coordinate ({}, {}) outside vehicle bbox plus {:.0}% slack",
                                    p.x,
                                    p.y,
                                    options.vehicle_slack * 100.0
                                ),
                            ));
                        }
                    }
                }
            }
        }
    }
    out
}

fn visible_coordinates(light: &super::LightAnnotation) -> Vec<PixelPoint> {
    let mut pts = Vec::new();
    pts.extend(light.center);
    if let Some(c) = &light.corners {
        pts.extend(c.visible_points());
    }
    if let Some(b) = &light.bbox {
        pts.push(b.top_left);
        pts.push(b.bottom_right);
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::tests::{arb_scenes, MINIMAL};
    use crate::annotation::{parse_scenes, LightAnnotation, LightPosition};
    use crate::geometry::{BoxTlbr, CornerSet};
    use proptest::prelude::*;

    fn scenes() -> Vec<SceneAnnotation> {
        parse_scenes(MINIMAL).unwrap()
    }

    #[test]
    fn valid_dataset_has_no_violations() {
        assert!(validate(&scenes()).is_empty());
    }

    #[test]
    fn center_outside_image() {
        let mut s = scenes();
        s[0].vehicles[0].bbox = BoxTlbr::from_coords(0.0, 0.0, 200.0, 100.0);
        s[0].vehicles[0].lights[0].center = Some(PixelPoint::new(250.0, 50.0));
        let v = validate(&s);
        // outside the image, and also outside the vehicle plus slack
        assert!(v.iter().any(|v| v.rule == Rule::OutOfImage));
        let only_image: Vec<_> = v.iter().filter(|v| v.rule == Rule::OutOfImage).collect();
        assert_eq!(only_image.len(), 1);
    }

    #[test]
    fn reversed_vehicle_box() {
        let mut s = scenes();
        s[0].vehicles[0].bbox = BoxTlbr::from_coords(110.0, 10.0, 10.0, 90.0);
        let v = validate(&s);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::InvalidBox);
    }

    #[test]
    fn slack_margin_is_five_percent_of_width() {
        let mut s = scenes();
        // vehicle is 100 px wide: slack 5 px
        s[0].vehicles[0].lights[0].center = Some(PixelPoint::new(115.0, 50.0));
        assert!(validate(&s).is_empty());
        s[0].vehicles[0].lights[0].center = Some(PixelPoint::new(115.5, 50.0));
        assert_eq!(validate(&s)[0].rule, Rule::OutsideVehicle);
        // hidden lights are not held to the vehicle box
        s[0].vehicles[0].lights[0].visible = false;
        assert!(validate(&s).is_empty());
    }

    #[test]
    fn visible_without_representation() {
        let mut s = scenes();
        s[0].vehicles[0].lights.push(LightAnnotation {
            visible: true,
            ..LightAnnotation::hidden(LightPosition::FrontLeft)
        });
        let v = validate(&s);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::MissingRepresentation);
        assert_eq!(v[0].light.as_deref(), Some("front-left"));
    }

    #[test]
    fn corner_flag_without_coordinates() {
        let mut s = scenes();
        s[0].vehicles[0].lights[0].corners = Some(CornerSet {
            corners: vec![None; 4],
            visible: vec![true, false, false, false],
        });
        assert_eq!(validate(&s)[0].rule, Rule::InvalidCorners);
    }

    #[test]
    fn duplicate_ids() {
        let mut s = scenes();
        let v = s[0].vehicles[0].clone();
        s[0].vehicles.push(v);
        s.push(s[0].clone());
        let rules: Vec<Rule> = validate(&s).iter().map(|v| v.rule).collect();
        assert!(rules.contains(&Rule::DuplicateVehicleId));
        assert!(rules.contains(&Rule::DuplicateSceneId));
    }

    /// Independent restatement of each rule over one light, used to check
    /// the validator is neither too strict nor too lax.
    fn light_is_sound(scene: &SceneAnnotation, vb: &BoxTlbr, l: &LightAnnotation) -> bool {
        let in_img = |p: &PixelPoint| {
            p.x >= 0.0 && p.y >= 0.0 && p.x <= scene.width as f64 && p.y <= scene.height as f64
        };
        let corners_ok = l.corners.as_ref().is_none_or(|c| {
            c.corners.len() == 4
                && c.visible.len() == 4
                && c.corners.iter().zip(&c.visible).all(|(p, &v)| !v || p.is_some())
        });
        let mut all = Vec::new();
        all.extend(l.center);
        if let Some(c) = &l.corners {
            all.extend(c.corners.iter().flatten());
        }
        let has_rep = l.center.is_some()
            || l.corners.as_ref().is_some_and(|c| c.visible.iter().any(|&v| v));
        let slack = vb.width() * 0.05;
        let near = |p: &PixelPoint| {
            p.x >= vb.top_left.x - slack
                && p.x <= vb.bottom_right.x + slack
                && p.y >= vb.top_left.y - slack
                && p.y <= vb.bottom_right.y + slack
        };
        let mut vis = Vec::new();
        vis.extend(l.center);
        if let Some(c) = &l.corners {
            vis.extend(c.corners.iter().zip(&c.visible).filter(|(_, &v)| v).filter_map(|(p, _)| *p));
        }
        corners_ok
            && all.iter().all(in_img)
            && (!l.visible || (has_rep && vis.iter().all(near)))
    }

    proptest! {
        #[test]
        fn validator_is_sound_and_complete(mut scenes in arb_scenes(), shrink in 0.0..45.0f64) {
            for s in &mut scenes {
                for v in &mut s.vehicles {
                    v.bbox = BoxTlbr::from_coords(shrink, shrink * 0.5, 100.0 - shrink, 80.0);
                }
            }
            let expected_ok = scenes.iter().all(|s| s.vehicles.iter().all(|v| {
                v.lights.iter().all(|l| light_is_sound(s, &v.bbox, l))
            }));
            prop_assert_eq!(validate(&scenes).is_empty(), expected_ok);
        }
    }
}
