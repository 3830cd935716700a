use crate::error::{LightError, Result};

use super::{BoxTlbr, PixelPoint};

/// Row-major boolean raster; `true` marks a light pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(LightError::invalid(format!(
                "mask of {width}x{height} needs {} bits, got {}",
                width * height,
                bits.len()
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    /// Builds a mask with the listed `(x, y)` pixels set.
    pub fn from_pixels(width: usize, height: usize, pixels: &[(usize, usize)]) -> Result<Self> {
        let mut mask = Self::new(width, height);
        for &(x, y) in pixels {
            if x >= width || y >= height {
                return Err(LightError::invalid(format!(
                    "pixel ({x}, {y}) outside {width}x{height} mask"
                )));
            }
            mask.set(x, y, true);
        }
        Ok(mask)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Set pixels as `(x, y)` in raster order.
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width.max(1);
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % w, i / w))
    }

    pub fn pixel_points(&self) -> Vec<PixelPoint> {
        self.pixels()
            .map(|(x, y)| PixelPoint::new(x as f64, y as f64))
            .collect()
    }
}

/// Tight half-open box around the set pixels: `(min x, min y)-(max x + 1, max y + 1)`.
///
/// Callers normally filter the mask to one component first; the box is
/// computed over every set pixel either way.
pub fn bbox_of_mask(mask: &BinaryMask) -> Result<BoxTlbr> {
    let mut pixels = mask.pixels();
    let (x0, y0) = pixels.next().ok_or(LightError::EmptyMask)?;
    let (mut min_x, mut max_x, mut max_y) = (x0, x0, y0);
    // raster order: the first pixel has the minimum row
    let min_y = y0;
    for (x, y) in pixels {
        min_x = min_x.min(x);
        max_x = max_x.max(x);
        max_y = max_y.max(y);
    }
    Ok(BoxTlbr::from_coords(
        min_x as f64,
        min_y as f64,
        (max_x + 1) as f64,
        (max_y + 1) as f64,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{bbox_of_points, centroid};
    use proptest::prelude::*;

    #[test]
    fn bbox_of_mask_examples() {
        let m = BinaryMask::from_pixels(8, 8, &[(2, 3), (4, 3), (3, 5)]).unwrap();
        assert_eq!(
            bbox_of_mask(&m).unwrap(),
            BoxTlbr::from_coords(2.0, 3.0, 5.0, 6.0)
        );
        let m = BinaryMask::from_pixels(10, 10, &[(7, 7)]).unwrap();
        assert_eq!(
            bbox_of_mask(&m).unwrap(),
            BoxTlbr::from_coords(7.0, 7.0, 8.0, 8.0)
        );
        assert!(matches!(
            bbox_of_mask(&BinaryMask::new(4, 4)),
            Err(LightError::EmptyMask)
        ));
    }

    #[test]
    fn from_bits_checks_length() {
        assert!(BinaryMask::from_bits(2, 2, vec![true; 3]).is_err());
        assert!(BinaryMask::from_pixels(2, 2, &[(2, 0)]).is_err());
    }

    fn mask_strategy() -> impl Strategy<Value = BinaryMask> {
        (1usize..20, 1usize..20).prop_flat_map(|(w, h)| {
            prop::collection::vec(any::<bool>(), w * h)
                .prop_map(move |bits| BinaryMask::from_bits(w, h, bits).unwrap())
        })
    }

    proptest! {
        #[test]
        fn bbox_of_mask_matches_points_plus_one(m in mask_strategy()) {
            prop_assume!(!m.is_empty());
            let pts = m.pixel_points();
            let b = bbox_of_points(&pts).unwrap();
            let expected = BoxTlbr::from_coords(
                b.top_left.x, b.top_left.y, b.bottom_right.x + 1.0, b.bottom_right.y + 1.0);
            let got = bbox_of_mask(&m).unwrap();
            prop_assert_eq!(got, expected);
            let c = centroid(&pts).unwrap();
            prop_assert!(got.contains(&c));
        }
    }
}
