//! Light representations and the lossy conversions between them.
//!
//! Coordinates follow the image convention: origin at the top-left pixel,
//! `x` grows rightward along columns and `y` grows downward along rows.
//! Boxes are half-open, `[x_tl, x_br) x [y_tl, y_br)`, so an integer box
//! covers exactly `w * h` pixels.

mod components;
mod mask;

pub use components::{connected_components, largest_component, Connectivity, LabeledMask};
pub use mask::{bbox_of_mask, BinaryMask};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{LightError, Result};

/// A real-valued pixel position. Integer values name pixel indices.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PixelPoint {
    pub x: f64,
    pub y: f64,
}

impl PixelPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Builds a point, rejecting NaN and infinite coordinates.
    pub fn try_new(x: f64, y: f64) -> Result<Self> {
        let p = Self { x, y };
        if p.is_finite() {
            Ok(p)
        } else {
            Err(LightError::invalid(format!("non-finite point ({x}, {y})")))
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &PixelPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl Serialize for PixelPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.x, self.y].serialize(s)
    }
}

impl<'de> Deserialize<'de> for PixelPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [x, y] = <[f64; 2]>::deserialize(d)?;
        Ok(PixelPoint { x, y })
    }
}

/// Box given by its top-left and bottom-right corners.
///
/// Deserialization does not enforce ordering so that malformed boxes can be
/// reported by the validator; use [`BoxTlbr::new`] to construct checked boxes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxTlbr {
    pub top_left: PixelPoint,
    pub bottom_right: PixelPoint,
}

impl BoxTlbr {
    pub fn new(top_left: PixelPoint, bottom_right: PixelPoint) -> Result<Self> {
        let b = Self {
            top_left,
            bottom_right,
        };
        if !b.is_valid() {
            return Err(LightError::invalid(format!(
                "box ({}, {})-({}, {}) is not ordered top-left to bottom-right",
                top_left.x, top_left.y, bottom_right.x, bottom_right.y
            )));
        }
        Ok(b)
    }

    /// Unchecked constructor from raw coordinates.
    pub const fn from_coords(x_tl: f64, y_tl: f64, x_br: f64, y_br: f64) -> Self {
        Self {
            top_left: PixelPoint::new(x_tl, y_tl),
            bottom_right: PixelPoint::new(x_br, y_br),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.top_left.is_finite()
            && self.bottom_right.is_finite()
            && self.top_left.x <= self.bottom_right.x
            && self.top_left.y <= self.bottom_right.y
    }

    pub fn width(&self) -> f64 {
        self.bottom_right.x - self.top_left.x
    }

    pub fn height(&self) -> f64 {
        self.bottom_right.y - self.top_left.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> PixelPoint {
        PixelPoint::new(
            (self.top_left.x + self.bottom_right.x) / 2.0,
            (self.top_left.y + self.bottom_right.y) / 2.0,
        )
    }

    /// Corners in role order: upper-left, upper-right, bottom-left, bottom-right.
    pub fn corners(&self) -> [PixelPoint; 4] {
        let (tl, br) = (self.top_left, self.bottom_right);
        [
            tl,
            PixelPoint::new(br.x, tl.y),
            PixelPoint::new(tl.x, br.y),
            br,
        ]
    }

    /// Closed containment test.
    pub fn contains(&self, p: &PixelPoint) -> bool {
        p.x >= self.top_left.x
            && p.x <= self.bottom_right.x
            && p.y >= self.top_left.y
            && p.y <= self.bottom_right.y
    }

    /// Grows the box by `margin` on every side.
    pub fn expand(&self, margin: f64) -> Self {
        Self::from_coords(
            self.top_left.x - margin,
            self.top_left.y - margin,
            self.bottom_right.x + margin,
            self.bottom_right.y + margin,
        )
    }

    pub fn to_array(&self) -> [f64; 4] {
        [
            self.top_left.x,
            self.top_left.y,
            self.bottom_right.x,
            self.bottom_right.y,
        ]
    }
}

impl Serialize for BoxTlbr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_array().serialize(s)
    }
}

impl<'de> Deserialize<'de> for BoxTlbr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [a, b, c, e] = <[f64; 4]>::deserialize(d)?;
        Ok(BoxTlbr::from_coords(a, b, c, e))
    }
}

/// Origin plus extent form of a box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxTlwh {
    pub top_left: PixelPoint,
    pub w: f64,
    pub h: f64,
}

/// Builds the corner form of a box from an origin and a non-negative size.
pub fn box_from_origin_size(origin: PixelPoint, w: f64, h: f64) -> Result<BoxTlbr> {
    if !(w >= 0.0 && h >= 0.0) || !w.is_finite() || !h.is_finite() {
        return Err(LightError::invalid(format!(
            "box size must be finite and non-negative, got w={w}, h={h}"
        )));
    }
    if !origin.is_finite() {
        return Err(LightError::invalid("non-finite box origin"));
    }
    Ok(BoxTlbr {
        top_left: origin,
        bottom_right: PixelPoint::new(origin.x + w, origin.y + h),
    })
}

pub fn origin_size_from_box(b: &BoxTlbr) -> BoxTlwh {
    BoxTlwh {
        top_left: b.top_left,
        w: b.width(),
        h: b.height(),
    }
}

impl TryFrom<BoxTlwh> for BoxTlbr {
    type Error = LightError;

    fn try_from(b: BoxTlwh) -> Result<Self> {
        box_from_origin_size(b.top_left, b.w, b.h)
    }
}

impl From<BoxTlbr> for BoxTlwh {
    fn from(b: BoxTlbr) -> Self {
        origin_size_from_box(&b)
    }
}

/// Arithmetic mean of a set of points.
///
/// Applied to box corners, light corners or mask pixels this gives the
/// center representation of a light.
pub fn centroid(points: &[PixelPoint]) -> Result<PixelPoint> {
    if points.is_empty() {
        return Err(LightError::EmptyInput("centroid of zero points"));
    }
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    Ok(PixelPoint::new(sx / n, sy / n))
}

/// Tight box `(min x, min y)-(max x, max y)` around a point set.
pub fn bbox_of_points(points: &[PixelPoint]) -> Result<BoxTlbr> {
    let first = points
        .first()
        .ok_or(LightError::EmptyInput("bounding box of zero points"))?;
    let mut b = BoxTlbr {
        top_left: *first,
        bottom_right: *first,
    };
    for p in &points[1..] {
        b.top_left.x = b.top_left.x.min(p.x);
        b.top_left.y = b.top_left.y.min(p.y);
        b.bottom_right.x = b.bottom_right.x.max(p.x);
        b.bottom_right.y = b.bottom_right.y.max(p.y);
    }
    Ok(b)
}

/// Corner roles of a four-corner light contour, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CornerRole {
    UpperLeft,
    UpperRight,
    BottomLeft,
    BottomRight,
}

impl CornerRole {
    pub const ALL: [CornerRole; 4] = [
        CornerRole::UpperLeft,
        CornerRole::UpperRight,
        CornerRole::BottomLeft,
        CornerRole::BottomRight,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn key(self) -> &'static str {
        match self {
            CornerRole::UpperLeft => "ul",
            CornerRole::UpperRight => "ur",
            CornerRole::BottomLeft => "bl",
            CornerRole::BottomRight => "br",
        }
    }

    /// Role after a horizontal reflection.
    pub fn mirrored(self) -> Self {
        match self {
            CornerRole::UpperLeft => CornerRole::UpperRight,
            CornerRole::UpperRight => CornerRole::UpperLeft,
            CornerRole::BottomLeft => CornerRole::BottomRight,
            CornerRole::BottomRight => CornerRole::BottomLeft,
        }
    }
}

/// Ordered contour points around a light with per-point visibility.
///
/// Vehicle lights use four points in [`CornerRole`] order. A corner that is
/// not visible may still carry coordinates if the source provided them; a
/// visible corner always has coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerSet {
    pub corners: Vec<Option<PixelPoint>>,
    pub visible: Vec<bool>,
}

impl CornerSet {
    pub fn new(corners: Vec<Option<PixelPoint>>, visible: Vec<bool>) -> Result<Self> {
        let set = Self { corners, visible };
        set.check()?;
        Ok(set)
    }

    /// A fully visible set.
    pub fn from_points(points: &[PixelPoint]) -> Result<Self> {
        Self::new(
            points.iter().copied().map(Some).collect(),
            vec![true; points.len()],
        )
    }

    pub fn check(&self) -> Result<()> {
        if self.corners.is_empty() {
            return Err(LightError::invalid("corner set needs at least one corner"));
        }
        if self.corners.len() != self.visible.len() {
            return Err(LightError::invalid(format!(
                "{} corners but {} visibility flags",
                self.corners.len(),
                self.visible.len()
            )));
        }
        for (i, (c, &v)) in self.corners.iter().zip(&self.visible).enumerate() {
            match c {
                None if v => {
                    return Err(LightError::invalid(format!(
                        "corner {i} is flagged visible but has no coordinates"
                    )))
                }
                Some(p) if !p.is_finite() => {
                    return Err(LightError::invalid(format!("corner {i} is not finite")))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.corners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.corners.is_empty()
    }

    /// Coordinates of the corners flagged visible, in role order.
    pub fn visible_points(&self) -> Vec<PixelPoint> {
        self.corners
            .iter()
            .zip(&self.visible)
            .filter_map(|(c, &v)| if v { *c } else { None })
            .collect()
    }

    pub fn any_visible(&self) -> bool {
        self.visible.iter().any(|&v| v)
    }

    pub fn get(&self, role: CornerRole) -> Option<PixelPoint> {
        self.corners.get(role.index()).copied().flatten()
    }

    pub fn is_visible(&self, role: CornerRole) -> bool {
        self.visible.get(role.index()).copied().unwrap_or(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(x: f64, y: f64) -> PixelPoint {
        PixelPoint::new(x, y)
    }

    #[test]
    fn box_from_origin_size_examples() {
        let b = box_from_origin_size(p(0.0, 0.0), 10.0, 20.0).unwrap();
        assert_eq!(b, BoxTlbr::from_coords(0.0, 0.0, 10.0, 20.0));
        let b = box_from_origin_size(p(5.0, 5.0), 0.0, 0.0).unwrap();
        assert_eq!(b, BoxTlbr::from_coords(5.0, 5.0, 5.0, 5.0));
        let b = box_from_origin_size(p(3.0, 4.0), 6.0, 4.0).unwrap();
        assert_eq!(b, BoxTlbr::from_coords(3.0, 4.0, 9.0, 8.0));
    }

    #[test]
    fn negative_size_is_rejected() {
        assert!(matches!(
            box_from_origin_size(p(0.0, 0.0), -1.0, 2.0),
            Err(LightError::InvalidArgument(_))
        ));
        assert!(box_from_origin_size(p(0.0, 0.0), 1.0, f64::NAN).is_err());
    }

    #[test]
    fn origin_size_examples() {
        let t = origin_size_from_box(&BoxTlbr::from_coords(0.0, 0.0, 10.0, 20.0));
        assert_eq!((t.top_left, t.w, t.h), (p(0.0, 0.0), 10.0, 20.0));
        let t = origin_size_from_box(&BoxTlbr::from_coords(5.0, 5.0, 5.0, 5.0));
        assert_eq!((t.w, t.h), (0.0, 0.0));
        let t = origin_size_from_box(&BoxTlbr::from_coords(3.0, 4.0, 9.0, 8.0));
        assert_eq!((t.top_left, t.w, t.h), (p(3.0, 4.0), 6.0, 4.0));
    }

    #[test]
    fn centroid_examples() {
        let pts = [p(3.0, 4.0), p(9.0, 4.0), p(3.0, 8.0), p(9.0, 8.0)];
        assert_eq!(centroid(&pts).unwrap(), p(6.0, 6.0));
        assert_eq!(centroid(&[p(7.0, 2.0)]).unwrap(), p(7.0, 2.0));
        let c = centroid(&[p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)]).unwrap();
        assert_eq!(c, p(1.0 / 3.0, 1.0 / 3.0));
        assert!(matches!(centroid(&[]), Err(LightError::EmptyInput(_))));
    }

    #[test]
    fn bbox_of_points_examples() {
        let pts = [p(3.0, 4.0), p(9.0, 4.0), p(3.0, 8.0), p(9.0, 8.0)];
        assert_eq!(
            bbox_of_points(&pts).unwrap(),
            BoxTlbr::from_coords(3.0, 4.0, 9.0, 8.0)
        );
        let rotated = [p(5.0, 2.0), p(8.0, 5.0), p(5.0, 8.0), p(2.0, 5.0)];
        assert_eq!(
            bbox_of_points(&rotated).unwrap(),
            BoxTlbr::from_coords(2.0, 2.0, 8.0, 8.0)
        );
        assert_eq!(
            bbox_of_points(&[p(7.0, 2.0)]).unwrap(),
            BoxTlbr::from_coords(7.0, 2.0, 7.0, 2.0)
        );
        assert!(bbox_of_points(&[]).is_err());
    }

    #[test]
    fn corner_set_rejects_visible_without_coordinates() {
        assert!(CornerSet::new(vec![None], vec![true]).is_err());
        assert!(CornerSet::new(vec![], vec![]).is_err());
        assert!(CornerSet::new(vec![Some(p(1.0, 1.0))], vec![true, false]).is_err());
        let set = CornerSet::new(vec![Some(p(1.0, 1.0)), None], vec![true, false]).unwrap();
        assert_eq!(set.visible_points(), vec![p(1.0, 1.0)]);
    }

    #[test]
    fn point_rejects_non_finite() {
        assert!(PixelPoint::try_new(f64::INFINITY, 0.0).is_err());
        assert!(PixelPoint::try_new(0.0, f64::NAN).is_err());
    }

    fn coord() -> impl Strategy<Value = f64> {
        -1.0e6..1.0e6f64
    }

    proptest! {
        #[test]
        fn origin_size_round_trip(x in coord(), y in coord(), w in 0i32..100_000, h in 0i32..100_000) {
            // integer sizes keep the addition exact
            let (x, y) = (x.round(), y.round());
            let b = box_from_origin_size(p(x, y), w as f64, h as f64).unwrap();
            let back = origin_size_from_box(&b);
            prop_assert_eq!(back.top_left, p(x, y));
            prop_assert_eq!(back.w, w as f64);
            prop_assert_eq!(back.h, h as f64);
        }

        #[test]
        fn centroid_of_box_corners_is_box_center(
            x in -1000i32..1000, y in -1000i32..1000, w in 0i32..500, h in 0i32..500
        ) {
            let b = box_from_origin_size(p(x as f64, y as f64), w as f64, h as f64).unwrap();
            prop_assert_eq!(centroid(&b.corners()).unwrap(), b.center());
        }

        #[test]
        fn bbox_of_points_is_tight(pts in prop::collection::vec((coord(), coord()), 1..40)) {
            let pts: Vec<PixelPoint> = pts.into_iter().map(|(x, y)| p(x, y)).collect();
            let b = bbox_of_points(&pts).unwrap();
            prop_assert!(pts.iter().all(|q| b.contains(q)));
            // every edge is attained, so shrinking it by any epsilon drops a point
            prop_assert!(pts.iter().any(|q| q.x == b.top_left.x));
            prop_assert!(pts.iter().any(|q| q.y == b.top_left.y));
            prop_assert!(pts.iter().any(|q| q.x == b.bottom_right.x));
            prop_assert!(pts.iter().any(|q| q.y == b.bottom_right.y));
        }
    }
}
