use crate::error::{LightError, Result};
use crate::geometry::{BinaryMask, BoxTlbr, PixelPoint};

/// Intersection over union of two half-open boxes; 0 when the union is empty.
pub fn box_iou(a: &BoxTlbr, b: &BoxTlbr) -> f64 {
    let iw = (a.bottom_right.x.min(b.bottom_right.x) - a.top_left.x.max(b.top_left.x)).max(0.0);
    let ih = (a.bottom_right.y.min(b.bottom_right.y) - a.top_left.y.max(b.top_left.y)).max(0.0);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// `|a & b| / |a | b|` over equally sized masks; 0 when both are empty.
pub fn mask_iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(LightError::invalid(format!(
            "mask sizes differ: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let (inter, union) = a
        .bits()
        .iter()
        .zip(b.bits())
        .fold((0usize, 0usize), |(i, u), (&x, &y)| {
            (i + (x && y) as usize, u + (x || y) as usize)
        });
    Ok(if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    })
}

/// Euclidean distance between two light centers divided by the vehicle width.
pub fn scaled_center_distance(pred: &PixelPoint, gt: &PixelPoint, vehicle_width: f64) -> Result<f64> {
    if !(vehicle_width > 0.0) || !vehicle_width.is_finite() {
        return Err(LightError::invalid(format!(
            "vehicle width must be positive, got {vehicle_width}"
        )));
    }
    Ok(pred.distance(gt) / vehicle_width)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(x0: f64, y0: f64, x1: f64, y1: f64) -> BoxTlbr {
        BoxTlbr::from_coords(x0, y0, x1, y1)
    }

    fn raster_iou(a: &BoxTlbr, c: &BoxTlbr, size: usize) -> f64 {
        let inside = |bx: &BoxTlbr, x: usize, y: usize| {
            (x as f64) >= bx.top_left.x
                && (x as f64) < bx.bottom_right.x
                && (y as f64) >= bx.top_left.y
                && (y as f64) < bx.bottom_right.y
        };
        let (mut i, mut u) = (0usize, 0usize);
        for y in 0..size {
            for x in 0..size {
                let (p, q) = (inside(a, x, y), inside(c, x, y));
                i += (p && q) as usize;
                u += (p || q) as usize;
            }
        }
        if u == 0 {
            0.0
        } else {
            i as f64 / u as f64
        }
    }

    #[test]
    fn box_iou_examples() {
        let a = b(0.0, 0.0, 10.0, 10.0);
        assert_eq!(box_iou(&a, &a), 1.0);
        assert_eq!(box_iou(&a, &b(20.0, 20.0, 30.0, 30.0)), 0.0);
        let c = b(5.0, 0.0, 15.0, 10.0);
        assert_eq!(box_iou(&a, &c), 1.0 / 3.0);
        assert_eq!(box_iou(&a, &c), raster_iou(&a, &c, 16));
        let d = b(3.0, 3.0, 3.0, 3.0);
        assert_eq!(box_iou(&d, &d), 0.0);
    }

    #[test]
    fn mask_iou_examples() {
        let a = BinaryMask::from_pixels(4, 4, &[(0, 0), (1, 0), (2, 0), (3, 0)]).unwrap();
        assert_eq!(mask_iou(&a, &a).unwrap(), 1.0);
        let far = BinaryMask::from_pixels(4, 4, &[(0, 3)]).unwrap();
        assert_eq!(mask_iou(&a, &far).unwrap(), 0.0);
        // overlap 2, union 6
        let c = BinaryMask::from_pixels(4, 4, &[(2, 0), (3, 0), (0, 1), (1, 1)]).unwrap();
        assert_eq!(mask_iou(&a, &c).unwrap(), 1.0 / 3.0);
        assert_eq!(mask_iou(&BinaryMask::new(2, 2), &BinaryMask::new(2, 2)).unwrap(), 0.0);
        assert!(mask_iou(&a, &BinaryMask::new(3, 4)).is_err());
    }

    #[test]
    fn scaled_distance_examples() {
        let d = scaled_center_distance(&PixelPoint::new(110.0, 50.0), &PixelPoint::new(100.0, 50.0), 200.0);
        assert_eq!(d.unwrap(), 0.05);
        let p = PixelPoint::new(3.0, 4.0);
        assert_eq!(scaled_center_distance(&p, &p, 10.0).unwrap(), 0.0);
        let d2 = scaled_center_distance(&PixelPoint::new(220.0, 100.0), &PixelPoint::new(200.0, 100.0), 400.0);
        assert_eq!(d2.unwrap(), 0.05);
        assert!(scaled_center_distance(&p, &p, 0.0).is_err());
        assert!(scaled_center_distance(&p, &p, -3.0).is_err());
    }

    fn int_box() -> impl Strategy<Value = BoxTlbr> {
        (0u32..64, 0u32..64, 0u32..64, 0u32..64).prop_map(|(a, c, d, e)| {
            b(a.min(c) as f64, d.min(e) as f64, a.max(c) as f64, d.max(e) as f64)
        })
    }

    proptest! {
        #[test]
        fn box_iou_properties(a in int_box(), c in int_box()) {
            let v = box_iou(&a, &c);
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert_eq!(v, box_iou(&c, &a));
            prop_assert_eq!(v, raster_iou(&a, &c, 64));
            if a.area() > 0.0 {
                prop_assert_eq!(v == 1.0, a == c);
            }
        }

        #[test]
        fn mask_iou_monotone_under_shared_pixels(
            bits_a in prop::collection::vec(any::<bool>(), 36),
            bits_b in prop::collection::vec(any::<bool>(), 36),
            extra in 0usize..36,
        ) {
            let a = BinaryMask::from_bits(6, 6, bits_a).unwrap();
            let c = BinaryMask::from_bits(6, 6, bits_b).unwrap();
            if !a.is_empty() {
                prop_assert_eq!(mask_iou(&a, &a).unwrap(), 1.0);
            }
            let before = mask_iou(&a, &c).unwrap();
            let (mut a2, mut c2) = (a.clone(), c.clone());
            a2.set(extra % 6, extra / 6, true);
            c2.set(extra % 6, extra / 6, true);
            prop_assert!(mask_iou(&a2, &c2).unwrap() >= before);
        }

        #[test]
        fn scaled_distance_is_scale_invariant(
            px in -500.0..500.0f64, py in -500.0..500.0f64,
            gx in -500.0..500.0f64, gy in -500.0..500.0f64,
            w in 1.0..1000.0f64, s in 0.01..100.0f64,
        ) {
            let d = scaled_center_distance(&PixelPoint::new(px, py), &PixelPoint::new(gx, gy), w).unwrap();
            let ds = scaled_center_distance(
                &PixelPoint::new(px * s, py * s), &PixelPoint::new(gx * s, gy * s), w * s).unwrap();
            prop_assert!((d - ds).abs() <= 1e-12 * d.max(1.0));
        }
    }
}
