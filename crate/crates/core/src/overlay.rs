//! Annotation overlays for visual inspection.

use image::{Rgb, RgbImage};

use crate::annotation::SceneAnnotation;
use crate::curation::{CuratedSample, HALF_CROP};
use crate::geometry::{BoxTlbr, CornerRole, PixelPoint};

pub const VEHICLE_COLOR: Rgb<u8> = Rgb([0, 255, 0]);
pub const LIGHT_COLOR: Rgb<u8> = Rgb([255, 255, 0]);
pub const CENTER_COLOR: Rgb<u8> = Rgb([255, 0, 255]);
pub const CORNER_COLOR: Rgb<u8> = Rgb([0, 255, 255]);

/// Marker colors by corner role in UL, UR, BL, BR order.
pub const ROLE_COLORS: [Rgb<u8>; 4] = [
    Rgb([255, 0, 0]),
    Rgb([0, 128, 255]),
    Rgb([255, 128, 0]),
    Rgb([128, 0, 255]),
];

/// Half side of a square marker, in pixels.
pub const MARKER_RADIUS: f64 = 2.0;

fn put(img: &mut RgbImage, x: i64, y: i64, c: Rgb<u8>) {
    if x >= 0 && y >= 0 && (x as u64) < img.width() as u64 && (y as u64) < img.height() as u64 {
        img.put_pixel(x as u32, y as u32, c);
    }
}

/// One-pixel outline of the pixels a half-open box covers.
pub fn draw_box(img: &mut RgbImage, b: &BoxTlbr, c: Rgb<u8>) {
    let x0 = b.top_left.x.floor() as i64;
    let y0 = b.top_left.y.floor() as i64;
    let x1 = b.bottom_right.x.ceil() as i64 - 1;
    let y1 = b.bottom_right.y.ceil() as i64 - 1;
    if x1 < x0 || y1 < y0 {
        return;
    }
    for x in x0..=x1 {
        put(img, x, y0, c);
        put(img, x, y1, c);
    }
    for y in y0..=y1 {
        put(img, x0, y, c);
        put(img, x1, y, c);
    }
}

/// Fills every pixel whose center lies strictly within `radius` of `p`
/// on both axes.
pub fn draw_marker(img: &mut RgbImage, p: PixelPoint, radius: f64, c: Rgb<u8>) {
    draw_marker_from(img, PixelPoint::default(), p, radius, c);
}

/// [`draw_marker`] at `origin + delta`, with distances taken as
/// `(pixel_center - origin) - delta` so markers mirror exactly about `origin`.
fn draw_marker_from(img: &mut RgbImage, origin: PixelPoint, delta: PixelPoint, radius: f64, c: Rgb<u8>) {
    let (px, py) = (origin.x + delta.x, origin.y + delta.y);
    let lo_x = (px - radius - 2.0).floor() as i64;
    let hi_x = (px + radius + 1.0).ceil() as i64;
    let lo_y = (py - radius - 2.0).floor() as i64;
    let hi_y = (py + radius + 1.0).ceil() as i64;
    for y in lo_y..=hi_y {
        if ((y as f64 + 0.5 - origin.y) - delta.y).abs() >= radius {
            continue;
        }
        for x in lo_x..=hi_x {
            if ((x as f64 + 0.5 - origin.x) - delta.x).abs() < radius {
                put(img, x, y, c);
            }
        }
    }
}

/// Scene image with vehicle boxes, light boxes, corner markers (colored by
/// role) and light centers.
pub fn render_scene_overlay(image: &RgbImage, scene: &SceneAnnotation) -> RgbImage {
    let mut out = image.clone();
    for vehicle in &scene.vehicles {
        draw_box(&mut out, &vehicle.bbox, VEHICLE_COLOR);
        for light in vehicle.lights.iter().filter(|l| l.visible) {
            if let Some(b) = light.resolved_box() {
                draw_box(&mut out, &b, LIGHT_COLOR);
            }
            if let Some(set) = &light.corners {
                for role in CornerRole::ALL {
                    if let Some(p) = set.get(role).filter(|_| set.is_visible(role)) {
                        draw_marker(&mut out, p, MARKER_RADIUS, ROLE_COLORS[role.index()]);
                    }
                }
            }
            if let Some(c) = light.resolved_center() {
                draw_marker(&mut out, c, MARKER_RADIUS, CENTER_COLOR);
            }
        }
    }
    out
}

/// Crop with its visible corner targets and the crop center marked.
///
/// Corners share one color so that the overlay of a reflected sample is
/// the exact mirror image of the original's overlay.
pub fn render_sample_overlay(sample: &CuratedSample) -> RgbImage {
    let mut out = sample.crop.clone();
    let mid = HALF_CROP as f64;
    let r = &sample.record;
    let origin = PixelPoint::new(mid, mid);
    for i in 0..4 {
        if r.corner_visible[i] {
            let delta = PixelPoint::new(mid * r.offsets[2 * i], mid * r.offsets[2 * i + 1]);
            draw_marker_from(&mut out, origin, delta, MARKER_RADIUS, CORNER_COLOR);
        }
    }
    draw_marker_from(&mut out, origin, PixelPoint::default(), MARKER_RADIUS, CENTER_COLOR);
    out
}
