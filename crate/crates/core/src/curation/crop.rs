use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use crate::error::{LightError, Result};
use crate::geometry::{BoxTlbr, PixelPoint};

/// Side length of a light-centered crop.
pub const CROP_SIZE: u32 = 128;
/// Distance from the crop edge to the light center; also the offset normalizer.
pub const HALF_CROP: i64 = 64;

/// Rounds to the nearest integer, ties toward negative infinity.
pub fn round_half_down(v: f64) -> i64 {
    (v - 0.5).ceil() as i64
}

/// Translates a scene-frame point into a vehicle frame
/// whose origin is `vehicle_origin`.
pub fn to_vehicle_frame(p: PixelPoint, vehicle_origin: PixelPoint) -> PixelPoint {
    PixelPoint::new(p.x - vehicle_origin.x, p.y - vehicle_origin.y)
}

pub fn from_vehicle_frame(p: PixelPoint, vehicle_origin: PixelPoint) -> PixelPoint {
    PixelPoint::new(p.x + vehicle_origin.x, p.y + vehicle_origin.y)
}

/// Black pixels added on each side of a crop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Padding {
    pub left: u32,
    pub right: u32,
    pub top: u32,
    pub bottom: u32,
}

impl Padding {
    pub fn mirrored(self) -> Self {
        Self {
            left: self.right,
            right: self.left,
            ..self
        }
    }
}

/// A 128x128 crop and where its window sat in the source raster.
#[derive(Debug, Clone)]
pub struct LightCrop {
    pub image: RgbImage,
    pub pad: Padding,
    /// Source-frame pixel at crop index (0, 0).
    pub window_origin: (i64, i64),
}

impl LightCrop {
    /// Source pixel the window is centered on; it lands at crop index (64, 64).
    pub fn center_pixel(&self) -> (i64, i64) {
        (self.window_origin.0 + HALF_CROP, self.window_origin.1 + HALF_CROP)
    }

    /// Maps a source-frame point into crop-local coordinates.
    pub fn to_local(&self, p: PixelPoint) -> PixelPoint {
        PixelPoint::new(
            p.x - self.window_origin.0 as f64,
            p.y - self.window_origin.1 as f64,
        )
    }
}

fn axis_padding(origin: i64, extent: u32) -> (u32, u32) {
    let size = CROP_SIZE as i64;
    let before = (-origin).clamp(0, size);
    let after = (origin + size - extent as i64).clamp(0, size);
    (before as u32, after as u32)
}

/// Crops the half-open window `[c - 64, c + 64)` around the rounded center,
/// filling everything outside `image` with black.
pub fn crop_light_centered(image: &RgbImage, center: PixelPoint) -> Result<LightCrop> {
    if !center.is_finite() {
        return Err(LightError::invalid(format!(
            "crop center ({}, {}) is not finite",
            center.x, center.y
        )));
    }
    let (cx, cy) = (round_half_down(center.x), round_half_down(center.y));
    let (ox, oy) = (cx - HALF_CROP, cy - HALF_CROP);
    let (w, h) = image.dimensions();
    let mut out = RgbImage::from_pixel(CROP_SIZE, CROP_SIZE, Rgb([0, 0, 0]));

    let x_lo = ox.max(0);
    let x_hi = (ox + CROP_SIZE as i64).min(w as i64);
    let y_lo = oy.max(0);
    let y_hi = (oy + CROP_SIZE as i64).min(h as i64);
    for sy in y_lo..y_hi {
        for sx in x_lo..x_hi {
            out.put_pixel(
                (sx - ox) as u32,
                (sy - oy) as u32,
                *image.get_pixel(sx as u32, sy as u32),
            );
        }
    }

    let (left, right) = axis_padding(ox, w);
    let (top, bottom) = axis_padding(oy, h);
    Ok(LightCrop {
        image: out,
        pad: Padding {
            left,
            right,
            top,
            bottom,
        },
        window_origin: (ox, oy),
    })
}

/// Integer pixel rectangle covering a vehicle box, clipped to the image.
///
/// Returns the cropped raster and its origin in the scene frame.
pub fn crop_vehicle(image: &RgbImage, bbox: &BoxTlbr) -> (RgbImage, (u32, u32)) {
    let (w, h) = image.dimensions();
    let x0 = (bbox.top_left.x.floor().max(0.0) as u32).min(w);
    let y0 = (bbox.top_left.y.floor().max(0.0) as u32).min(h);
    let x1 = (bbox.bottom_right.x.ceil().max(0.0) as u32).clamp(x0, w);
    let y1 = (bbox.bottom_right.y.ceil().max(0.0) as u32).clamp(y0, h);
    let crop = image::imageops::crop_imm(image, x0, y0, x1 - x0, y1 - y0).to_image();
    (crop, (x0, y0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gradient(w: u32, h: u32) -> RgbImage {
        // never black, so padding can be told apart from content
        RgbImage::from_fn(w, h, |x, y| Rgb([(x % 250) as u8 + 1, (y % 250) as u8 + 1, 7]))
    }

    /// Rebuilds the crop one output pixel at a time from the window definition.
    fn per_pixel_oracle(image: &RgbImage, cx: i64, cy: i64) -> RgbImage {
        RgbImage::from_fn(128, 128, |u, v| {
            let sx = cx - 64 + u as i64;
            let sy = cy - 64 + v as i64;
            if sx >= 0 && sy >= 0 && sx < image.width() as i64 && sy < image.height() as i64 {
                *image.get_pixel(sx as u32, sy as u32)
            } else {
                Rgb([0, 0, 0])
            }
        })
    }

    #[test]
    fn vehicle_crop_example_padding() {
        let img = gradient(80, 100);
        let crop = crop_light_centered(&img, PixelPoint::new(30.0, 70.0)).unwrap();
        // window columns [-34, 94) overrun the 80 px width by 14
        assert_eq!(
            crop.pad,
            Padding {
                left: 34,
                right: 14,
                top: 0,
                bottom: 34
            }
        );
        assert_eq!(crop.image, per_pixel_oracle(&img, 30, 70));
        assert_eq!(crop.image.get_pixel(64, 64), img.get_pixel(30, 70));
    }

    #[test]
    fn exact_fit_has_no_padding() {
        let img = gradient(128, 128);
        let crop = crop_light_centered(&img, PixelPoint::new(64.0, 64.0)).unwrap();
        assert_eq!(crop.pad, Padding::default());
        assert_eq!(crop.image, img);
    }

    #[test]
    fn non_finite_center() {
        let img = gradient(4, 4);
        assert!(crop_light_centered(&img, PixelPoint::new(f64::NAN, 1.0)).is_err());
    }

    #[test]
    fn rounding_ties_go_down() {
        assert_eq!(round_half_down(2.5), 2);
        assert_eq!(round_half_down(2.51), 3);
        assert_eq!(round_half_down(-2.5), -3);
        assert_eq!(round_half_down(7.0), 7);
    }

    #[test]
    fn window_entirely_outside() {
        let img = gradient(10, 10);
        let crop = crop_light_centered(&img, PixelPoint::new(500.0, 5.0)).unwrap();
        assert_eq!(crop.pad.left + crop.pad.right, 128);
        assert!(crop.image.pixels().all(|p| p.0 == [0, 0, 0]));
    }

    #[test]
    fn vehicle_frame_examples() {
        let p = to_vehicle_frame(PixelPoint::new(100.0, 80.0), PixelPoint::new(40.0, 30.0));
        assert_eq!(p, PixelPoint::new(60.0, 50.0));
        let q = PixelPoint::new(12.25, 3.5);
        assert_eq!(to_vehicle_frame(q, PixelPoint::default()), q);
        let o = PixelPoint::new(40.0, 30.0);
        assert_eq!(from_vehicle_frame(to_vehicle_frame(q, o), o), q);
    }

    #[test]
    fn vehicle_crop_covers_fractional_box() {
        let img = gradient(50, 40);
        let (crop, origin) = crop_vehicle(&img, &BoxTlbr::from_coords(10.5, 5.2, 20.1, 30.0));
        assert_eq!(origin, (10, 5));
        assert_eq!(crop.dimensions(), (11, 25));
    }

    proptest! {
        #[test]
        fn crop_matches_oracle_and_padding_area(
            w in 1u32..200, h in 1u32..200,
            cx in -150.0..350.0f64, cy in -150.0..350.0f64,
        ) {
            let img = gradient(w, h);
            let crop = crop_light_centered(&img, PixelPoint::new(cx, cy)).unwrap();
            let (rx, ry) = (round_half_down(cx), round_half_down(cy));
            prop_assert_eq!(crop.image.dimensions(), (128, 128));
            prop_assert_eq!(&crop.image, &per_pixel_oracle(&img, rx, ry));
            let overlap = |o: i64, n: u32| ((o + 128).min(n as i64) - o.max(0)).max(0);
            let covered = overlap(rx - 64, w) * overlap(ry - 64, h);
            let black = crop.image.pixels().filter(|p| p.0 == [0, 0, 0]).count() as i64;
            prop_assert_eq!(black, 128 * 128 - covered);
            prop_assert_eq!(
                (crop.pad.left + crop.pad.right) as i64,
                128 - overlap(rx - 64, w).max(0).min(128)
            );
            if rx >= 0 && ry >= 0 && rx < w as i64 && ry < h as i64 {
                prop_assert_eq!(crop.image.get_pixel(64, 64), img.get_pixel(rx as u32, ry as u32));
            }
        }
    }
}
