//! Seeded synthetic gesture corpus.
//!
//! Each class gets an archetype built from a palm ellipse, a wrist bar and a
//! handful of finger strokes. Samples render the archetype in skin tone on a
//! dark background with random translation, small scale jitter and
//! salt-and-pepper noise.

use std::fs;
use std::io;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cropper::crop_hand;
use crate::imaging::{write_pnm, BinaryMask, RgbImage};

pub const SKIN_TONE: [u8; 3] = [200, 140, 110];
pub const BACKGROUND: [u8; 3] = [25, 30, 45];

/// Static alphabet letters; the two motion letters are absent.
pub const ALPHABET: [&str; 24] = [
    "A", "B", "C", "D", "E", "F", "G", "I", "K", "L", "M", "N", "O", "P", "Q", "R", "S", "T", "U", "V", "W",
    "X", "Y", "Z",
];

/// Label of class `index`: letters first, then `C<index>`.
pub fn class_label(index: usize) -> String {
    ALPHABET.get(index).map_or_else(|| format!("C{index}"), |s| s.to_string())
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("need at least 2 classes and 1 sample per class")]
    TooSmall,
    #[error("jitter out of range: {0}")]
    Jitter(&'static str),
    #[error("hand of {hand}px with shift {shift}px does not fit a {canvas}px canvas")]
    Canvas { hand: usize, shift: usize, canvas: usize },
    #[error("could not find {0} mutually distinct archetypes")]
    Archetypes(usize),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Per-sample perturbation bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jitter {
    /// Maximum translation in pixels along each axis.
    pub max_shift: usize,
    /// Maximum relative scale change, at most 0.05.
    pub scale: f64,
    /// Fraction of pixels replaced by black or white, at most 0.02.
    pub noise: f64,
}

impl Jitter {
    pub const NONE: Jitter = Jitter { max_shift: 0, scale: 0.0, noise: 0.0 };
}

impl Default for Jitter {
    fn default() -> Self {
        Self { max_shift: 16, scale: 0.05, noise: 0.02 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub seed: u64,
    pub classes: usize,
    pub samples: usize,
    pub jitter: Jitter,
    /// Square canvas side in pixels.
    pub canvas: usize,
    /// Nominal hand frame side in pixels.
    pub hand: usize,
}

impl SynthParams {
    pub fn new(seed: u64, classes: usize, samples: usize) -> Self {
        Self { seed, classes, samples, jitter: Jitter::default(), canvas: 128, hand: 72 }
    }

    fn validate(&self) -> Result<(), SynthError> {
        if self.classes < 2 || self.samples < 1 {
            return Err(SynthError::TooSmall);
        }
        let j = &self.jitter;
        if !(0.0..=0.05).contains(&j.scale) {
            return Err(SynthError::Jitter("scale must lie in [0, 0.05]"));
        }
        if !(0.0..=0.02).contains(&j.noise) {
            return Err(SynthError::Jitter("noise must lie in [0, 0.02]"));
        }
        let largest = (self.hand as f64 * (1.0 + j.scale)).ceil() as usize;
        if self.hand < 16 || largest + 2 * j.max_shift + 2 > self.canvas {
            return Err(SynthError::Canvas { hand: self.hand, shift: j.max_shift, canvas: self.canvas });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Ellipse {
    cx: f64,
    cy: f64,
    rx: f64,
    ry: f64,
}

/// Thick line segment with round caps.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Stroke {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    radius: f64,
}

impl Stroke {
    fn contains(&self, x: f64, y: f64) -> bool {
        let (dx, dy) = (self.x1 - self.x0, self.y1 - self.y0);
        let len2 = dx * dx + dy * dy;
        let t = if len2 == 0.0 { 0.0 } else { (((x - self.x0) * dx + (y - self.y0) * dy) / len2).clamp(0.0, 1.0) };
        let (px, py) = (self.x0 + t * dx - x, self.y0 + t * dy - y);
        px * px + py * py <= self.radius * self.radius
    }
}

/// A class's hand shape in unit-frame coordinates (x right, y down, the
/// wrist reaching the bottom edge).
#[derive(Debug, Clone, PartialEq)]
pub struct Archetype {
    palm: Ellipse,
    knuckle: Option<Ellipse>,
    wrist_half_width: f64,
    strokes: Vec<Stroke>,
}

impl Archetype {
    fn random(rng: &mut impl Rng) -> Self {
        let palm = Ellipse {
            cx: 0.5 + rng.gen_range(-0.08..0.08),
            cy: 0.62 + rng.gen_range(-0.05..0.05),
            rx: rng.gen_range(0.16..0.26),
            ry: rng.gen_range(0.13..0.2),
        };
        let knuckle = rng.gen_bool(0.4).then(|| Ellipse {
            cx: palm.cx + rng.gen_range(-0.12..0.12),
            cy: palm.cy - palm.ry * rng.gen_range(0.5..1.0),
            rx: rng.gen_range(0.08..0.16),
            ry: rng.gen_range(0.06..0.12),
        });
        let fingers = rng.gen_range(1..=5);
        let mut strokes = Vec::new();
        for _ in 0..fingers {
            let angle = rng.gen_range(-170.0f64..-10.0).to_radians();
            let (bx, by) = (palm.cx + palm.rx * 0.8 * angle.cos(), palm.cy + palm.ry * 0.8 * angle.sin());
            let len = rng.gen_range(0.18..0.42);
            let radius = rng.gen_range(0.03..0.055);
            let (ex, ey) = (bx + len * angle.cos(), by + len * angle.sin());
            strokes.push(Stroke { x0: bx, y0: by, x1: ex, y1: ey, radius });
            if rng.gen_bool(0.3) {
                // bent finger tip
                let bend = angle + rng.gen_range(-1.4..1.4);
                let tip = rng.gen_range(0.08..0.18);
                strokes.push(Stroke { x0: ex, y0: ey, x1: ex + tip * bend.cos(), y1: ey + tip * bend.sin(), radius });
            }
        }
        for s in &mut strokes {
            s.x0 = s.x0.clamp(0.02, 0.98);
            s.x1 = s.x1.clamp(0.02, 0.98);
            s.y0 = s.y0.clamp(0.02, 0.98);
            s.y1 = s.y1.clamp(0.02, 0.98);
        }
        Self { palm, knuckle, wrist_half_width: rng.gen_range(0.1..0.17), strokes }
    }

    /// Whether unit-frame point `(x, y)` lies on the hand.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let in_ellipse = |e: &Ellipse| {
            let (u, v) = ((x - e.cx) / e.rx, (y - e.cy) / e.ry);
            u * u + v * v <= 1.0
        };
        if !(0.0..1.0).contains(&x) || !(0.0..1.0).contains(&y) {
            return false;
        }
        in_ellipse(&self.palm)
            || self.knuckle.as_ref().is_some_and(in_ellipse)
            || (y >= self.palm.cy && (x - self.palm.cx).abs() <= self.wrist_half_width)
            || self.strokes.iter().any(|s| s.contains(x, y))
    }

    /// Foreground mask of a `canvas`×`canvas` scene with the hand frame of
    /// side `size` whose top-left corner sits at `origin`.
    pub fn render_mask(&self, canvas: usize, origin: (f64, f64), size: f64) -> BinaryMask {
        BinaryMask::from_fn(canvas, canvas, |x, y| {
            self.contains((x as f64 + 0.5 - origin.0) / size, (y as f64 + 0.5 - origin.1) / size)
        })
    }
}

/// Skin-toned foreground over the dark background.
pub fn paint(mask: &BinaryMask) -> RgbImage {
    RgbImage::from_fn(mask.width(), mask.height(), |x, y| if mask.get(x, y) { SKIN_TONE } else { BACKGROUND })
}

fn hamming_fraction(a: &BinaryMask, b: &BinaryMask) -> f64 {
    let diff = a.bits().iter().zip(b.bits()).filter(|(x, y)| x != y).count();
    diff as f64 / a.bits().len() as f64
}

/// Minimum fraction of differing pixels between any two archetype crops.
const MIN_ARCHETYPE_DISTANCE: f64 = 0.12;
const ARCHETYPE_ATTEMPTS: usize = 200;

pub fn archetypes(seed: u64, classes: usize) -> Result<Vec<Archetype>, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<(Archetype, BinaryMask)> = Vec::with_capacity(classes);
    while chosen.len() < classes {
        let mut found = None;
        for _ in 0..ARCHETYPE_ATTEMPTS {
            let candidate = Archetype::random(&mut rng);
            let Ok(crop) = crop_hand(&candidate.render_mask(100, (0.0, 0.0), 100.0), 50) else {
                continue;
            };
            if chosen.iter().all(|(_, c)| hamming_fraction(c, &crop) >= MIN_ARCHETYPE_DISTANCE) {
                found = Some((candidate, crop));
                break;
            }
        }
        chosen.push(found.ok_or(SynthError::Archetypes(classes))?);
    }
    Ok(chosen.into_iter().map(|(a, _)| a).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthClass {
    pub label: String,
    pub images: Vec<RgbImage>,
}

/// Renders the whole corpus in memory. Identical parameters always give
/// identical pixels.
pub fn synth_corpus(params: &SynthParams) -> Result<Vec<SynthClass>, SynthError> {
    params.validate()?;
    let shapes = archetypes(params.seed, params.classes)?;
    let j = params.jitter;
    let mut out = Vec::with_capacity(params.classes);
    for (c, shape) in shapes.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(c as u64 + 1);
        let mut images = Vec::with_capacity(params.samples);
        for _ in 0..params.samples {
            let scale = if j.scale > 0.0 { 1.0 + rng.gen_range(-j.scale..=j.scale) } else { 1.0 };
            let size = params.hand as f64 * scale;
            let shift = j.max_shift as i64;
            let (sx, sy) = if shift > 0 {
                (rng.gen_range(-shift..=shift), rng.gen_range(-shift..=shift))
            } else {
                (0, 0)
            };
            let centre = (params.canvas as f64 - size) / 2.0;
            let origin = ((centre + sx as f64).round(), (centre + sy as f64).round());
            let mut img = paint(&shape.render_mask(params.canvas, origin, size));
            if j.noise > 0.0 {
                for y in 0..params.canvas {
                    for x in 0..params.canvas {
                        if rng.gen_bool(j.noise) {
                            img.set(x, y, if rng.gen_bool(0.5) { [255, 255, 255] } else { [0, 0, 0] });
                        }
                    }
                }
            }
            images.push(img);
        }
        out.push(SynthClass { label: class_label(c), images });
    }
    Ok(out)
}

/// Writes `<dir>/<label>/<label>-<nn>.ppm` for every sample.
pub fn write_corpus(dir: &Path, corpus: &[SynthClass]) -> Result<usize, SynthError> {
    let mut written = 0;
    for class in corpus {
        let class_dir = dir.join(&class.label);
        fs::create_dir_all(&class_dir)?;
        for (i, img) in class.images.iter().enumerate() {
            let path = class_dir.join(format!("{}-{:02}.ppm", class.label, i));
            fs::write(path, write_pnm(&img.clone().into()))?;
            written += 1;
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_pixels() {
        let p = SynthParams::new(9, 3, 2);
        assert_eq!(synth_corpus(&p).unwrap(), synth_corpus(&p).unwrap());
        let other = SynthParams::new(10, 3, 2);
        assert_ne!(synth_corpus(&p).unwrap(), synth_corpus(&other).unwrap());
    }

    #[test]
    fn zero_jitter_repeats_each_class() {
        let mut p = SynthParams::new(4, 4, 3);
        p.jitter = Jitter::NONE;
        for class in synth_corpus(&p).unwrap() {
            assert!(class.images.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn labels_skip_motion_letters() {
        assert_eq!(class_label(7), "I");
        assert_eq!(class_label(23), "Z");
        assert_eq!(class_label(24), "C24");
        assert!(!ALPHABET.contains(&"H") && !ALPHABET.contains(&"J"));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(synth_corpus(&SynthParams::new(1, 1, 5)), Err(SynthError::TooSmall)));
        let mut p = SynthParams::new(1, 2, 1);
        p.jitter.noise = 0.1;
        assert!(matches!(synth_corpus(&p), Err(SynthError::Jitter(_))));
        let mut p = SynthParams::new(1, 2, 1);
        p.jitter.max_shift = 40;
        assert!(matches!(synth_corpus(&p), Err(SynthError::Canvas { .. })));
    }

    #[test]
    fn archetypes_are_distinct() {
        let shapes = archetypes(3, 24).unwrap();
        let crops: Vec<_> = shapes
            .iter()
            .map(|s| crop_hand(&s.render_mask(100, (0.0, 0.0), 100.0), 50).unwrap())
            .collect();
        for i in 0..crops.len() {
            for j in (i + 1)..crops.len() {
                assert!(hamming_fraction(&crops[i], &crops[j]) >= MIN_ARCHETYPE_DISTANCE);
            }
        }
    }
}
