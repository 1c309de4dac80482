//! Skin-pixel thresholding, binary majority smoothing and largest-component
//! selection.

use std::collections::VecDeque;

use thiserror::Error;

use crate::imaging::{rgb_to_hsv, BinaryMask, RgbImage};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid skin range: {0}")]
pub struct SkinRangeError(&'static str);

/// Inclusive hue (degrees) and saturation bounds of the skin envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkinRange {
    h_lo: f64,
    h_hi: f64,
    s_lo: f64,
    s_hi: f64,
}

impl SkinRange {
    pub fn new(h_lo: f64, h_hi: f64, s_lo: f64, s_hi: f64) -> Result<Self, SkinRangeError> {
        if !(0.0 <= h_lo && h_lo <= h_hi && h_hi < 360.0) {
            return Err(SkinRangeError("hue bounds must satisfy 0 <= lo <= hi < 360"));
        }
        if !(0.0 <= s_lo && s_lo <= s_hi && s_hi <= 1.0) {
            return Err(SkinRangeError("saturation bounds must satisfy 0 <= lo <= hi <= 1"));
        }
        Ok(Self { h_lo, h_hi, s_lo, s_hi })
    }

    pub fn hue(&self) -> (f64, f64) {
        (self.h_lo, self.h_hi)
    }

    pub fn saturation(&self) -> (f64, f64) {
        (self.s_lo, self.s_hi)
    }

    pub fn contains(&self, rgb: [u8; 3]) -> bool {
        let hsv = rgb_to_hsv(rgb[0], rgb[1], rgb[2]);
        match hsv.h {
            Some(h) => {
                (self.h_lo..=self.h_hi).contains(&h) && (self.s_lo..=self.s_hi).contains(&hsv.s)
            }
            None => false,
        }
    }
}

impl Default for SkinRange {
    fn default() -> Self {
        Self { h_lo: 0.0, h_hi: 50.0, s_lo: 0.20, s_hi: 0.68 }
    }
}

pub fn skin_mask(image: &RgbImage, range: &SkinRange) -> BinaryMask {
    let bits = image.pixels().iter().map(|&p| range.contains(p)).collect();
    BinaryMask::new(image.width(), image.height(), bits).expect("same dimensions as image")
}

/// Binary majority filter over a `(2r+1)²` window. Coordinates falling
/// outside the raster are clamped to the nearest edge pixel.
pub fn median_smooth(mask: &BinaryMask, radius: usize) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    let (w, h) = (mask.width(), mask.height());
    let (pw, ph) = (w + 2 * radius, h + 2 * radius);

    // Summed-area table over the edge-replicated raster, one extra row/col of zeros.
    let mut sat = vec![0u32; (pw + 1) * (ph + 1)];
    for py in 0..ph {
        let sy = py.saturating_sub(radius).min(h - 1);
        let mut row_sum = 0u32;
        for px in 0..pw {
            let sx = px.saturating_sub(radius).min(w - 1);
            row_sum += mask.get(sx, sy) as u32;
            sat[(py + 1) * (pw + 1) + px + 1] = sat[py * (pw + 1) + px + 1] + row_sum;
        }
    }

    let side = 2 * radius + 1;
    let half = (side * side / 2) as u32;
    BinaryMask::from_fn(w, h, |x, y| {
        // window in padded coordinates: [x, x+side) × [y, y+side)
        let at = |px: usize, py: usize| sat[py * (pw + 1) + px];
        let count = at(x + side, y + side) + at(x, y) - at(x, y + side) - at(x + side, y);
        count > half
    })
}

/// Labels 8-connected components of `mask`, returning one pixel-index list
/// per component in order of each component's first pixel (row-major).
pub fn connected_components(mask: &BinaryMask) -> Vec<Vec<usize>> {
    let (w, h) = (mask.width(), mask.height());
    let bits = mask.bits();
    let mut seen = vec![false; bits.len()];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();

    for start in 0..bits.len() {
        if !bits[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut members = Vec::new();
        while let Some(idx) = queue.pop_front() {
            members.push(idx);
            let (x, y) = (idx % w, idx / w);
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let n = ny * w + nx;
                    if bits[n] && !seen[n] {
                        seen[n] = true;
                        queue.push_back(n);
                    }
                }
            }
        }
        components.push(members);
    }
    components
}

/// Keeps only the largest 8-connected foreground component. Among equally
/// large components the one whose first pixel comes first in row-major
/// order wins.
pub fn biggest_blob(mask: &BinaryMask) -> BinaryMask {
    let mut out = BinaryMask::filled(mask.width(), mask.height(), false);
    let mut best: Option<Vec<usize>> = None;
    for comp in connected_components(mask) {
        if best.as_ref().is_none_or(|b| comp.len() > b.len()) {
            best = Some(comp);
        }
    }
    let w = mask.width();
    for idx in best.unwrap_or_default() {
        out.set(idx % w, idx / w, true);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mask_from_rows(rows: &[&str]) -> BinaryMask {
        let w = rows[0].len();
        let bits = rows.iter().flat_map(|r| r.bytes().map(|c| c == b'#')).collect();
        BinaryMask::new(w, rows.len(), bits).unwrap()
    }

    #[test]
    fn black_image_has_no_skin() {
        let img = RgbImage::filled(4, 3, [0, 0, 0]);
        assert!(skin_mask(&img, &SkinRange::default()).is_empty());
    }

    #[test]
    fn bounds_are_inclusive() {
        let img = RgbImage::filled(3, 3, [255, 0, 0]);
        let range = SkinRange::new(0.0, 50.0, 0.1, 1.0).unwrap();
        assert_eq!(skin_mask(&img, &range), BinaryMask::filled(3, 3, true));
    }

    #[test]
    fn half_skin_half_blue() {
        // (200,140,110): MAX=R, delta=90/255, h = 60*30/90 = 20, s = 90/200 = 0.45 -> skin
        // (0,0,255): h = 240 -> not skin
        let img = RgbImage::from_fn(4, 4, |x, _| if x < 2 { [200, 140, 110] } else { [0, 0, 255] });
        let expected = BinaryMask::from_fn(4, 4, |x, _| x < 2);
        assert_eq!(skin_mask(&img, &SkinRange::default()), expected);
    }

    #[test]
    fn rejects_inverted_ranges() {
        assert!(SkinRange::new(50.0, 10.0, 0.2, 0.6).is_err());
        assert!(SkinRange::new(0.0, 360.0, 0.2, 0.6).is_err());
        assert!(SkinRange::new(0.0, 50.0, 0.7, 0.6).is_err());
        assert!(SkinRange::new(0.0, 50.0, 0.2, 1.5).is_err());
    }

    #[test]
    fn smooth_radius_zero_is_identity() {
        let m = mask_from_rows(&["#..#", ".##.", "#..."]);
        assert_eq!(median_smooth(&m, 0), m);
    }

    #[test]
    fn smooth_constant_true() {
        let m = BinaryMask::filled(7, 4, true);
        assert_eq!(median_smooth(&m, 2), m);
    }

    #[test]
    fn smooth_removes_isolated_pixel() {
        let mut m = BinaryMask::filled(5, 5, false);
        m.set(2, 2, true);
        assert_eq!(median_smooth(&m, 1), BinaryMask::filled(5, 5, false));
    }

    /// Direct window count with clamped coordinates.
    fn smooth_oracle(m: &BinaryMask, r: usize) -> BinaryMask {
        let (w, h) = (m.width() as i64, m.height() as i64);
        let r = r as i64;
        BinaryMask::from_fn(m.width(), m.height(), |x, y| {
            let mut ones = 0;
            let mut total = 0;
            for dy in -r..=r {
                for dx in -r..=r {
                    let sx = (x as i64 + dx).clamp(0, w - 1) as usize;
                    let sy = (y as i64 + dy).clamp(0, h - 1) as usize;
                    ones += m.get(sx, sy) as usize;
                    total += 1;
                }
            }
            2 * ones > total
        })
    }

    #[test]
    fn smooth_matches_window_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let w = rng.gen_range(1..15);
            let h = rng.gen_range(1..15);
            let m = BinaryMask::from_fn(w, h, |_, _| rng.gen_bool(0.5));
            for r in 0..4 {
                assert_eq!(median_smooth(&m, r), smooth_oracle(&m, r));
            }
        }
    }

    #[test]
    fn single_component_unchanged() {
        let m = mask_from_rows(&[".##.", "#..#", ".##."]);
        assert_eq!(biggest_blob(&m), m);
    }

    #[test]
    fn larger_run_wins() {
        let m = mask_from_rows(&["###.##"]);
        assert_eq!(biggest_blob(&m), mask_from_rows(&["###..."]));
    }

    #[test]
    fn equal_sizes_keep_first() {
        let m = mask_from_rows(&["##.##"]);
        assert_eq!(biggest_blob(&m), mask_from_rows(&["##..."]));
    }

    #[test]
    fn diagonal_neighbours_connect() {
        let m = mask_from_rows(&["#..", ".#.", "..#", "##."]);
        assert_eq!(biggest_blob(&m), m);
    }

    #[test]
    fn empty_input_gives_empty_output() {
        let m = BinaryMask::filled(3, 3, false);
        assert_eq!(biggest_blob(&m), m);
    }

    /// Flood fill from every foreground pixel independently; the largest
    /// reachable set (first in row-major order on ties) is the answer.
    fn blob_oracle(m: &BinaryMask) -> BinaryMask {
        let (w, h) = (m.width() as i64, m.height() as i64);
        let mut best: Vec<(usize, usize)> = Vec::new();
        for y in 0..m.height() {
            for x in 0..m.width() {
                if !m.get(x, y) {
                    continue;
                }
                let mut visited = vec![vec![false; m.width()]; m.height()];
                let mut stack = vec![(x, y)];
                let mut region = Vec::new();
                visited[y][x] = true;
                while let Some((cx, cy)) = stack.pop() {
                    region.push((cx, cy));
                    for dy in -1i64..=1 {
                        for dx in -1i64..=1 {
                            let nx = cx as i64 + dx;
                            let ny = cy as i64 + dy;
                            if nx < 0 || ny < 0 || nx >= w || ny >= h {
                                continue;
                            }
                            let (nx, ny) = (nx as usize, ny as usize);
                            if m.get(nx, ny) && !visited[ny][nx] {
                                visited[ny][nx] = true;
                                stack.push((nx, ny));
                            }
                        }
                    }
                }
                if region.len() > best.len() {
                    best = region;
                }
            }
        }
        let mut out = BinaryMask::filled(m.width(), m.height(), false);
        for (x, y) in best {
            out.set(x, y, true);
        }
        out
    }

    #[test]
    fn blob_matches_flood_fill_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..30 {
            let m = BinaryMask::from_fn(20, 20, |_, _| rng.gen_bool(0.35));
            assert_eq!(biggest_blob(&m), blob_oracle(&m));
        }
    }

    fn arb_mask() -> impl Strategy<Value = BinaryMask> {
        (1usize..16, 1usize..16).prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<bool>(), w * h)
                .prop_map(move |bits| BinaryMask::new(w, h, bits).unwrap())
        })
    }

    proptest! {
        #[test]
        fn blob_is_subset_connected_and_idempotent(m in arb_mask()) {
            let b = biggest_blob(&m);
            for (o, i) in b.bits().iter().zip(m.bits()) {
                prop_assert!(!o || *i);
            }
            prop_assert!(connected_components(&b).len() <= 1);
            prop_assert_eq!(biggest_blob(&b), b);
        }

        #[test]
        fn skin_mask_is_per_pixel(
            pixels in proptest::collection::vec(any::<[u8; 3]>(), 12),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            let range = SkinRange::default();
            let img = RgbImage::new(4, 3, pixels.clone()).unwrap();
            let mut perm: Vec<usize> = (0..12).collect();
            perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let shuffled = RgbImage::new(4, 3, perm.iter().map(|&i| pixels[i]).collect()).unwrap();
            let shuffled_mask = skin_mask(&shuffled, &range);
            let mut restored = vec![false; 12];
            for (k, &i) in perm.iter().enumerate() {
                restored[i] = shuffled_mask.bits()[k];
            }
            let direct = skin_mask(&img, &range);
            prop_assert_eq!(restored.as_slice(), direct.bits());
        }
    }
}
