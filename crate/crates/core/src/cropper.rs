//! Tight bounding box of the hand mask and nearest-neighbour rescaling to
//! the square feature raster.

use thiserror::Error;

use crate::imaging::BinaryMask;

pub const DEFAULT_CROP_SIDE: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CropError {
    #[error("EmptyMask: segmentation found no hand pixels")]
    EmptyMask,
    #[error("bounding box {0:?} does not fit inside a {1}x{2} mask")]
    BoxOutOfBounds(BoundingBox, usize, usize),
    #[error("crop side must be at least 1")]
    ZeroSide,
}

/// Inclusive pixel-coordinate box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub x_min: usize,
    pub y_min: usize,
    pub x_max: usize,
    pub y_max: usize,
}

impl BoundingBox {
    pub fn width(&self) -> usize {
        self.x_max - self.x_min + 1
    }

    pub fn height(&self) -> usize {
        self.y_max - self.y_min + 1
    }
}

/// Edge of the bounding box where the arm leaves the frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Bottom,
    Top,
    Left,
    Right,
}

pub fn bounding_box(mask: &BinaryMask) -> Result<BoundingBox, CropError> {
    let mut bbox: Option<BoundingBox> = None;
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if !mask.get(x, y) {
                continue;
            }
            bbox = Some(match bbox {
                None => BoundingBox { x_min: x, y_min: y, x_max: x, y_max: y },
                Some(b) => BoundingBox {
                    x_min: b.x_min.min(x),
                    y_min: b.y_min.min(y),
                    x_max: b.x_max.max(x),
                    y_max: b.y_max.max(y),
                },
            });
        }
    }
    bbox.ok_or(CropError::EmptyMask)
}

/// Extracts `bbox` and resamples it to `side`×`side`. Output pixel `(j, i)`
/// (column, row) reads source pixel
/// `(x_min + ⌊(j+½)·w/side⌋, y_min + ⌊(i+½)·h/side⌋)`.
pub fn crop_resize(mask: &BinaryMask, bbox: BoundingBox, side: usize) -> Result<BinaryMask, CropError> {
    if side == 0 {
        return Err(CropError::ZeroSide);
    }
    if bbox.x_min > bbox.x_max
        || bbox.y_min > bbox.y_max
        || bbox.x_max >= mask.width()
        || bbox.y_max >= mask.height()
    {
        return Err(CropError::BoxOutOfBounds(bbox, mask.width(), mask.height()));
    }
    let (bw, bh) = (bbox.width(), bbox.height());
    // (2k+1)·n / (2·side) is the exact floor of (k+0.5)·n/side
    let cols: Vec<usize> = (0..side).map(|j| bbox.x_min + (2 * j + 1) * bw / (2 * side)).collect();
    let rows: Vec<usize> = (0..side).map(|i| bbox.y_min + (2 * i + 1) * bh / (2 * side)).collect();
    Ok(BinaryMask::from_fn(side, side, |x, y| mask.get(cols[x], rows[y])))
}

/// Bounding box followed by resampling.
pub fn crop_hand(mask: &BinaryMask, side: usize) -> Result<BinaryMask, CropError> {
    let bbox = bounding_box(mask)?;
    crop_resize(mask, bbox, side)
}

/// The box edge carrying the longest contiguous run of foreground pixels.
/// Ties resolve in the order bottom, top, left, right.
pub fn wrist_side(mask: &BinaryMask, bbox: BoundingBox) -> Side {
    fn longest_run(bits: impl Iterator<Item = bool>) -> usize {
        let (mut best, mut cur) = (0, 0);
        for b in bits {
            cur = if b { cur + 1 } else { 0 };
            best = best.max(cur);
        }
        best
    }
    let xs = bbox.x_min..=bbox.x_max;
    let ys = bbox.y_min..=bbox.y_max;
    let candidates = [
        (Side::Bottom, longest_run(xs.clone().map(|x| mask.get(x, bbox.y_max)))),
        (Side::Top, longest_run(xs.map(|x| mask.get(x, bbox.y_min)))),
        (Side::Left, longest_run(ys.clone().map(|y| mask.get(bbox.x_min, y)))),
        (Side::Right, longest_run(ys.map(|y| mask.get(bbox.x_max, y)))),
    ];
    let mut best = candidates[0];
    for c in &candidates[1..] {
        if c.1 > best.1 {
            best = *c;
        }
    }
    best.0
}
