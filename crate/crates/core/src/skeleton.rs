//! Centerline extraction, 8-connected component labeling and block tiling.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::raster::BinaryMask;

/// Neighbour offsets in Zhang-Suen order P2..P9: N, NE, E, SE, S, SW, W, NW.
const RING: [(i64, i64); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

fn ring(mask: &BinaryMask, x: usize, y: usize) -> [bool; 8] {
    let (x, y) = (x as i64, y as i64);
    RING.map(|(dx, dy)| mask.get_signed(x + dx, y + dy))
}

/// Number of foreground neighbours (B) and background→foreground transitions
/// around the ring (A).
fn ring_counts(p: &[bool; 8]) -> (usize, usize) {
    let b = p.iter().filter(|&&v| v).count();
    let a = (0..8).filter(|&i| !p[i] && p[(i + 1) % 8]).count();
    (a, b)
}

#[inline]
fn removable(p: &[bool; 8]) -> bool {
    let (a, b) = ring_counts(p);
    a == 1 && (2..=6).contains(&b)
}

/// Zhang-Suen thinning to a one pixel wide centerline.
///
/// Each subiteration selects candidates on a snapshot with the classic
/// conditions and removes them all at once, unless that would split or erase
/// an 8-connected component (as it does for 2×2 squares and two-pixel-thick
/// diagonals). In that case the candidates are removed one at a time in
/// row-major order, each re-checked against the current state, so only
/// simple points go. Pixels outside the mask are background.
pub fn skeletonize(mask: &BinaryMask) -> BinaryMask {
    let mut out = mask.clone();
    let mut candidates = Vec::new();
    loop {
        let mut changed = false;
        for first in [true, false] {
            candidates.clear();
            for (x, y) in out.ones() {
                let p = ring(&out, x, y);
                if !removable(&p) {
                    continue;
                }
                let (n, e, s, w) = (p[0], p[2], p[4], p[6]);
                let keep = if first {
                    (n && e && s) || (e && s && w)
                } else {
                    (n && e && w) || (n && s && w)
                };
                if !keep {
                    candidates.push((x, y));
                }
            }
            if candidates.is_empty() {
                continue;
            }
            let mut parallel = out.clone();
            for &(x, y) in &candidates {
                parallel.set(x, y, false);
            }
            if preserves_components(&out, &parallel) {
                out = parallel;
                changed = true;
                continue;
            }
            for &(x, y) in &candidates {
                if removable(&ring(&out, x, y)) {
                    out.set(x, y, false);
                    changed = true;
                }
            }
        }
        if !changed {
            return out;
        }
    }
}

/// True when every component of `before` still holds exactly one component
/// of `after` (`after` must be a subset of `before`).
fn preserves_components(before: &BinaryMask, after: &BinaryMask) -> bool {
    let (old, n_old) = label_map(before);
    let (new, _) = label_map(after);
    let mut image = vec![0u32; n_old + 1];
    for (&o, &n) in old.iter().zip(&new) {
        if n == 0 {
            continue;
        }
        match image[o as usize] {
            0 => image[o as usize] = n,
            k if k != n => return false,
            _ => {}
        }
    }
    image[1..].iter().all(|&k| k != 0)
}

/// Row-major 8-connected labels (0 is background, components numbered from
/// 1 in order of their first pixel) and the component count.
fn label_map(mask: &BinaryMask) -> (Vec<u32>, usize) {
    let w = mask.width();
    let mut labels = vec![0u32; mask.len()];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for (sx, sy) in mask.ones() {
        if labels[sy * w + sx] != 0 {
            continue;
        }
        count += 1;
        let id = count as u32;
        labels[sy * w + sx] = id;
        queue.push_back((sx, sy));
        while let Some((x, y)) = queue.pop_front() {
            for (dx, dy) in RING {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if mask.get_signed(nx, ny) {
                    let idx = ny as usize * w + nx as usize;
                    if labels[idx] == 0 {
                        labels[idx] = id;
                        queue.push_back((nx as usize, ny as usize));
                    }
                }
            }
        }
    }
    (labels, count)
}

/// Axis-aligned inclusive pixel bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundingBox {
    pub x_min: usize,
    pub y_min: usize,
    pub x_max: usize,
    pub y_max: usize,
}

/// One 8-connected set of foreground pixels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PixelComponent {
    /// `(x, y)` coordinates in row-major order.
    pixels: Vec<(usize, usize)>,
    bounding_box: BoundingBox,
}

impl PixelComponent {
    /// Builds a component from pixel coordinates, sorting them row-major.
    /// Connectivity is the caller's responsibility.
    pub fn from_pixels(mut pixels: Vec<(usize, usize)>) -> Result<Self> {
        if pixels.is_empty() {
            return Err(Error::DegenerateComponent);
        }
        pixels.sort_by_key(|&(x, y)| (y, x));
        pixels.dedup();
        let mut bb = BoundingBox {
            x_min: usize::MAX,
            y_min: usize::MAX,
            x_max: 0,
            y_max: 0,
        };
        for &(x, y) in &pixels {
            bb.x_min = bb.x_min.min(x);
            bb.y_min = bb.y_min.min(y);
            bb.x_max = bb.x_max.max(x);
            bb.y_max = bb.y_max.max(y);
        }
        Ok(Self {
            pixels,
            bounding_box: bb,
        })
    }

    pub fn pixels(&self) -> &[(usize, usize)] {
        &self.pixels
    }

    pub fn bounding_box(&self) -> BoundingBox {
        self.bounding_box
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// Number of rows spanned by the component.
    pub fn row_count(&self) -> usize {
        self.bounding_box.y_max - self.bounding_box.y_min + 1
    }

    /// Same component shifted by `(dx, dy)`.
    pub fn translated(&self, dx: usize, dy: usize) -> Self {
        let bb = self.bounding_box;
        Self {
            pixels: self.pixels.iter().map(|&(x, y)| (x + dx, y + dy)).collect(),
            bounding_box: BoundingBox {
                x_min: bb.x_min + dx,
                y_min: bb.y_min + dy,
                x_max: bb.x_max + dx,
                y_max: bb.y_max + dy,
            },
        }
    }
}

/// 8-connected components, ordered by their first row-major pixel.
pub fn connected_components(mask: &BinaryMask) -> Vec<PixelComponent> {
    let (labels, count) = label_map(mask);
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::new(); count];
    for (x, y) in mask.ones() {
        groups[labels[y * mask.width() + x] as usize - 1].push((x, y));
    }
    groups
        .into_iter()
        .map(|px| PixelComponent::from_pixels(px).expect("non-empty"))
        .collect()
}

/// Rectangle `(x, y, w, h)` in mask coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Block {
    pub fn area(&self) -> usize {
        self.w * self.h
    }
}

/// Non-overlapping tiling of a mask into square blocks (edge blocks may be smaller).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockGrid {
    pub block_size: usize,
    /// Row-major block order.
    pub blocks: Vec<Block>,
}

pub const MIN_BLOCK_SIZE: usize = 8;

pub fn partition_blocks(mask: &BinaryMask, block_size: usize) -> Result<BlockGrid> {
    if block_size < MIN_BLOCK_SIZE {
        return Err(Error::InvalidBlockSize(block_size));
    }
    let (w, h) = (mask.width(), mask.height());
    let mut blocks = Vec::new();
    for y in (0..h).step_by(block_size) {
        for x in (0..w).step_by(block_size) {
            blocks.push(Block {
                x,
                y,
                w: block_size.min(w - x),
                h: block_size.min(h - y),
            });
        }
    }
    Ok(BlockGrid { block_size, blocks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_mask_stays_empty() {
        let m = BinaryMask::new(6, 4).unwrap();
        assert_eq!(skeletonize(&m), m);
    }

    #[test]
    fn thin_line_unchanged() {
        let m = BinaryMask::from_ascii(&[".......", ".#####.", "......."]).unwrap();
        assert_eq!(skeletonize(&m), m);
    }

    #[test]
    fn two_by_two_square_keeps_a_pixel() {
        let m = BinaryMask::from_ascii(&["....", ".##.", ".##.", "...."]).unwrap();
        let s = skeletonize(&m);
        assert!(s.count_ones() >= 1);
        assert_eq!(connected_components(&s).len(), 1);
    }

    #[test]
    fn thick_bar_thins_to_one_pixel_rows() {
        let m = BinaryMask::from_ascii(&[
            "............",
            ".##########.",
            ".##########.",
            ".##########.",
            "............",
        ])
        .unwrap();
        let s = skeletonize(&m);
        for x in 0..12 {
            let col: usize = (0..5).filter(|&y| s.get(x, y)).count();
            assert!(col <= 1, "column {x} has {col} pixels");
        }
        assert_eq!(connected_components(&s).len(), 1);
    }

    #[test]
    fn diagonal_pixels_are_one_component() {
        let m = BinaryMask::from_ascii(&["#.", ".#"]).unwrap();
        assert_eq!(connected_components(&m).len(), 1);
    }

    #[test]
    fn gap_of_two_splits_components() {
        let m = BinaryMask::from_ascii(&["#..#"]).unwrap();
        let cc = connected_components(&m);
        assert_eq!(cc.len(), 2);
        assert_eq!(cc[0].pixels(), &[(0, 0)]);
        assert_eq!(cc[1].pixels(), &[(3, 0)]);
    }

    #[test]
    fn components_ordered_by_first_pixel() {
        let m = BinaryMask::from_ascii(&["...#", "#..#", "#..."]).unwrap();
        let cc = connected_components(&m);
        assert_eq!(cc[0].pixels()[0], (3, 0));
        assert_eq!(cc[1].pixels()[0], (0, 1));
        assert_eq!(cc[1].row_count(), 2);
    }

    #[test]
    fn block_tiling_cases() {
        let m = BinaryMask::new(256, 256).unwrap();
        let g = partition_blocks(&m, 32).unwrap();
        assert_eq!(g.blocks.len(), 64);
        assert!(g.blocks.iter().all(|b| b.w == 32 && b.h == 32));

        let m = BinaryMask::new(10, 10).unwrap();
        let g = partition_blocks(&m, 8).unwrap();
        let dims: Vec<_> = g.blocks.iter().map(|b| (b.w, b.h)).collect();
        assert_eq!(dims, vec![(8, 8), (2, 8), (8, 2), (2, 2)]);

        let m = BinaryMask::new(32, 32).unwrap();
        assert_eq!(partition_blocks(&m, 32).unwrap().blocks.len(), 1);
        assert!(matches!(
            partition_blocks(&m, 7),
            Err(Error::InvalidBlockSize(7))
        ));
    }
}
