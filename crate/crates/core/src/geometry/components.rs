use crate::error::{LightError, Result};

use super::BinaryMask;

/// Pixel adjacency used when joining light pixels into components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    /// Edge neighbours only.
    Four,
    /// Edge and diagonal neighbours.
    #[default]
    Eight,
}

impl TryFrom<u8> for Connectivity {
    type Error = LightError;

    fn try_from(value: u8) -> Result<Self> {
        match value {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            other => Err(LightError::invalid(format!(
                "connectivity must be 4 or 8, got {other}"
            ))),
        }
    }
}

impl From<Connectivity> for u8 {
    fn from(c: Connectivity) -> u8 {
        match c {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

/// Per-pixel component labels. Label 0 is background; components are
/// numbered from 1 in raster order of their first pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledMask {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    component_sizes: Vec<usize>,
}

impl LabeledMask {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn num_components(&self) -> usize {
        self.component_sizes.len()
    }

    /// Pixel count of component `label` (1-based).
    pub fn component_size(&self, label: u32) -> usize {
        self.component_sizes[label as usize - 1]
    }

    pub fn component_sizes(&self) -> &[usize] {
        &self.component_sizes
    }

    /// Mask holding only the pixels of component `label`.
    pub fn component_mask(&self, label: u32) -> BinaryMask {
        let bits = self.labels.iter().map(|&l| l == label && l != 0).collect();
        BinaryMask::from_bits(self.width, self.height, bits).expect("dimensions preserved")
    }
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Labels the maximal connected sets of light pixels.
///
/// Two-pass union-find over already-visited neighbours, followed by a
/// renumbering pass so labels follow raster order of each component's
/// first pixel.
pub fn connected_components(mask: &BinaryMask, connectivity: Connectivity) -> LabeledMask {
    let (w, h) = (mask.width(), mask.height());
    let bits = mask.bits();
    let mut provisional = vec![u32::MAX; w * h];
    let mut sets = DisjointSet { parent: Vec::new() };

    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !bits[i] {
                continue;
            }
            let mut neighbours = [u32::MAX; 4];
            let mut n = 0;
            let mut push = |label: u32| {
                if label != u32::MAX {
                    neighbours[n] = label;
                    n += 1;
                }
            };
            if x > 0 {
                push(provisional[i - 1]);
            }
            if y > 0 {
                push(provisional[i - w]);
                if connectivity == Connectivity::Eight {
                    if x > 0 {
                        push(provisional[i - w - 1]);
                    }
                    if x + 1 < w {
                        push(provisional[i - w + 1]);
                    }
                }
            }
            let label = match neighbours[..n].iter().min() {
                Some(&m) => m,
                None => sets.make(),
            };
            for &other in &neighbours[..n] {
                sets.union(label, other);
            }
            provisional[i] = label;
        }
    }

    let mut final_of_root = vec![0u32; sets.parent.len()];
    let mut sizes = Vec::new();
    let mut labels = vec![0u32; w * h];
    for (i, &p) in provisional.iter().enumerate() {
        if p == u32::MAX {
            continue;
        }
        let root = sets.find(p) as usize;
        if final_of_root[root] == 0 {
            sizes.push(0);
            final_of_root[root] = sizes.len() as u32;
        }
        let label = final_of_root[root];
        sizes[label as usize - 1] += 1;
        labels[i] = label;
    }

    LabeledMask {
        width: w,
        height: h,
        labels,
        component_sizes: sizes,
    }
}

/// Keeps only the largest component, or nothing when it is smaller than
/// `min_area`. Equal sizes resolve to the lower label.
pub fn largest_component(labeled: &LabeledMask, min_area: usize) -> BinaryMask {
    let best = labeled
        .component_sizes
        .iter()
        .enumerate()
        .fold(None::<(usize, usize)>, |best, (i, &size)| match best {
            Some((_, s)) if s >= size => best,
            _ => Some((i, size)),
        });
    match best {
        Some((i, size)) if size >= min_area => labeled.component_mask(i as u32 + 1),
        _ => BinaryMask::new(labeled.width, labeled.height),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Stack flood fill seeded in raster order.
    fn flood_fill_oracle(mask: &BinaryMask, eight: bool) -> (Vec<u32>, Vec<usize>) {
        let (w, h) = (mask.width() as i64, mask.height() as i64);
        let mut labels = vec![0u32; (w * h) as usize];
        let mut sizes = Vec::new();
        for sy in 0..h {
            for sx in 0..w {
                let si = (sy * w + sx) as usize;
                if !mask.bits()[si] || labels[si] != 0 {
                    continue;
                }
                sizes.push(0);
                let label = sizes.len() as u32;
                let mut stack = vec![(sx, sy)];
                labels[si] = label;
                while let Some((x, y)) = stack.pop() {
                    sizes[label as usize - 1] += 1;
                    for dy in -1..=1i64 {
                        for dx in -1..=1i64 {
                            if (dx == 0 && dy == 0) || (!eight && dx != 0 && dy != 0) {
                                continue;
                            }
                            let (nx, ny) = (x + dx, y + dy);
                            if nx < 0 || ny < 0 || nx >= w || ny >= h {
                                continue;
                            }
                            let ni = (ny * w + nx) as usize;
                            if mask.bits()[ni] && labels[ni] == 0 {
                                labels[ni] = label;
                                stack.push((nx, ny));
                            }
                        }
                    }
                }
            }
        }
        (labels, sizes)
    }

    #[test]
    fn diagonal_pair_depends_on_connectivity() {
        let m = BinaryMask::from_pixels(3, 3, &[(0, 0), (1, 1)]).unwrap();
        assert_eq!(connected_components(&m, Connectivity::Four).num_components(), 2);
        assert_eq!(connected_components(&m, Connectivity::Eight).num_components(), 1);
    }

    #[test]
    fn empty_and_full_masks() {
        let empty = BinaryMask::new(5, 4);
        assert_eq!(connected_components(&empty, Connectivity::Eight).num_components(), 0);
        let full = BinaryMask::from_bits(2, 2, vec![true; 4]).unwrap();
        let l = connected_components(&full, Connectivity::Four);
        assert_eq!(l.component_sizes(), &[4]);
    }

    #[test]
    fn invalid_connectivity() {
        assert!(Connectivity::try_from(6).is_err());
        assert_eq!(Connectivity::try_from(4).unwrap(), Connectivity::Four);
    }

    #[test]
    fn u_shape_merges_late() {
        // two arms joined only by the bottom row
        let m = BinaryMask::from_pixels(
            3,
            3,
            &[(0, 0), (2, 0), (0, 1), (2, 1), (0, 2), (1, 2), (2, 2)],
        )
        .unwrap();
        let l = connected_components(&m, Connectivity::Four);
        assert_eq!(l.component_sizes(), &[7]);
        assert_eq!(l.label(2, 0), 1);
    }

    #[test]
    fn largest_component_examples() {
        // sizes {5, 2}
        let m = BinaryMask::from_pixels(
            8,
            3,
            &[(0, 0), (1, 0), (2, 0), (3, 0), (4, 0), (6, 2), (7, 2)],
        )
        .unwrap();
        let l = connected_components(&m, Connectivity::Eight);
        assert_eq!(l.component_sizes(), &[5, 2]);
        assert_eq!(largest_component(&l, 3).count(), 5);

        // sizes {2, 2}, both below threshold
        let m = BinaryMask::from_pixels(6, 1, &[(0, 0), (1, 0), (4, 0), (5, 0)]).unwrap();
        let l = connected_components(&m, Connectivity::Eight);
        assert!(largest_component(&l, 3).is_empty());

        // sizes {4, 4}: the component whose first pixel comes first in raster order wins
        let m = BinaryMask::from_pixels(
            6,
            4,
            &[(4, 0), (5, 0), (4, 1), (5, 1), (0, 2), (1, 2), (0, 3), (1, 3)],
        )
        .unwrap();
        let l = connected_components(&m, Connectivity::Eight);
        let kept = largest_component(&l, 1);
        let (_, oracle_sizes) = flood_fill_oracle(&m, true);
        assert_eq!(oracle_sizes, vec![4, 4]);
        assert!(kept.get(4, 0) && !kept.get(0, 2));
    }

    #[test]
    fn largest_component_of_empty_is_empty() {
        let l = connected_components(&BinaryMask::new(3, 3), Connectivity::Eight);
        assert!(largest_component(&l, 0).is_empty());
    }

    fn mask_strategy() -> impl Strategy<Value = BinaryMask> {
        (1usize..=16, 1usize..=16, 0.1f64..0.9).prop_flat_map(|(w, h, p)| {
            prop::collection::vec(prop::bool::weighted(p), w * h)
                .prop_map(move |bits| BinaryMask::from_bits(w, h, bits).unwrap())
        })
    }

    proptest! {
        #[test]
        fn matches_flood_fill(m in mask_strategy()) {
            for (conn, eight) in [(Connectivity::Four, false), (Connectivity::Eight, true)] {
                let got = connected_components(&m, conn);
                let (labels, sizes) = flood_fill_oracle(&m, eight);
                prop_assert_eq!(got.labels(), &labels[..]);
                prop_assert_eq!(got.component_sizes(), &sizes[..]);
                prop_assert_eq!(sizes.iter().sum::<usize>(), m.count());
            }
        }
    }
}
