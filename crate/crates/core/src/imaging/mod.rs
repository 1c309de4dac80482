//! Raster containers, PNM file I/O and the RGB to HSV transform.

mod hsv;
mod pnm;

pub use hsv::{rgb_to_hsv, Hsv};
pub use pnm::{read_pnm, write_pnm, PnmError, Raster};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImageError {
    #[error("image dimensions must be at least 1x1, got {width}x{height}")]
    EmptyDimensions { width: usize, height: usize },
    #[error("expected {expected} pixels for the given dimensions, got {actual}")]
    PixelCount { expected: usize, actual: usize },
}

fn check_dims(width: usize, height: usize, actual: usize) -> Result<(), ImageError> {
    if width == 0 || height == 0 {
        return Err(ImageError::EmptyDimensions { width, height });
    }
    let expected = width * height;
    if expected != actual {
        return Err(ImageError::PixelCount { expected, actual });
    }
    Ok(())
}

/// Row-major 8-bit RGB raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self, ImageError> {
        check_dims(width, height, pixels.len())?;
        Ok(Self { width, height, pixels })
    }

    /// Image of the given size with every pixel set to `color`.
    ///
    /// # Panics
    ///
    /// If either dimension is zero.
    pub fn filled(width: usize, height: usize, color: [u8; 3]) -> Self {
        Self::new(width, height, vec![color; width * height]).expect("non-empty dimensions")
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels).expect("non-empty dimensions")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, color: [u8; 3]) {
        self.pixels[y * self.width + x] = color;
    }

    /// Copy of the image with every pixel outside `mask` set to black.
    pub fn masked(&self, mask: &BinaryMask) -> RgbImage {
        assert_eq!((self.width, self.height), (mask.width(), mask.height()));
        let pixels = self
            .pixels
            .iter()
            .zip(mask.bits())
            .map(|(&p, &keep)| if keep { p } else { [0, 0, 0] })
            .collect();
        RgbImage { width: self.width, height: self.height, pixels }
    }
}

/// Row-major 8-bit grayscale raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, ImageError> {
        check_dims(width, height, pixels.len())?;
        Ok(Self { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}

impl From<&BinaryMask> for GrayImage {
    /// Foreground maps to 255, background to 0.
    fn from(mask: &BinaryMask) -> Self {
        let pixels = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
        GrayImage { width: mask.width(), height: mask.height(), pixels }
    }
}

/// Row-major boolean raster; `true` marks foreground (skin) pixels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self, ImageError> {
        check_dims(width, height, bits.len())?;
        Ok(Self { width, height, bits })
    }

    /// # Panics
    ///
    /// If either dimension is zero.
    pub fn filled(width: usize, height: usize, value: bool) -> Self {
        Self::new(width, height, vec![value; width * height]).expect("non-empty dimensions")
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self::new(width, height, bits).expect("non-empty dimensions")
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

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }
}
