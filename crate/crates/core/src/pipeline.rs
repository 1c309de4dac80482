//! End-to-end composition: raster → skin mask → smoothed → biggest blob →
//! crop → eigen-features.

use thiserror::Error;

use crate::config::PipelineConfig;
use crate::cropper::{crop_hand, CropError};
use crate::features::{extract_features, FeatureError, FeatureSet};
use crate::imaging::{BinaryMask, PnmError, Raster};
use crate::scalar::Scalar;
use crate::segmenter::{biggest_blob, median_smooth, skin_mask};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Pnm(#[from] PnmError),
    #[error(transparent)]
    Crop(#[from] CropError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

/// Intermediate masks of one pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct Stages {
    pub skin: BinaryMask,
    pub smoothed: BinaryMask,
    pub blob: BinaryMask,
    pub crop: BinaryMask,
}

/// Foreground mask for a decoded raster. RGB images go through skin
/// thresholding; bitmaps are already masks; grayscale pixels count as
/// foreground from 128 upward.
pub fn foreground(raster: &Raster, cfg: &PipelineConfig) -> BinaryMask {
    match raster {
        Raster::Rgb(img) => skin_mask(img, &cfg.skin),
        Raster::Binary(mask) => mask.clone(),
        Raster::Gray(img) => {
            BinaryMask::new(img.width(), img.height(), img.pixels().iter().map(|&p| p >= 128).collect())
                .expect("same dimensions as image")
        }
    }
}

pub fn segment(raster: &Raster, cfg: &PipelineConfig) -> Result<Stages, PipelineError> {
    let skin = foreground(raster, cfg);
    let smoothed = median_smooth(&skin, cfg.smooth_radius);
    let blob = biggest_blob(&smoothed);
    let crop = crop_hand(&blob, cfg.crop_side)?;
    Ok(Stages { skin, smoothed, blob, crop })
}

pub fn raster_features<T: Scalar>(raster: &Raster, cfg: &PipelineConfig) -> Result<FeatureSet<T>, PipelineError> {
    let stages = segment(raster, cfg)?;
    Ok(extract_features(&stages.crop, cfg.eigen_count)?)
}

/// Decodes PNM bytes and extracts features.
pub fn pnm_features<T: Scalar>(bytes: &[u8], cfg: &PipelineConfig) -> Result<FeatureSet<T>, PipelineError> {
    let raster = crate::imaging::read_pnm(bytes)?;
    raster_features(&raster, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::RgbImage;

    const SKIN: [u8; 3] = [200, 140, 110];

    fn scene(dx: usize, dy: usize) -> RgbImage {
        RgbImage::from_fn(80, 80, |x, y| {
            let (x, y) = (x as i64 - dx as i64, y as i64 - dy as i64);
            let palm = (10..30).contains(&x) && (15..35).contains(&y);
            let finger = (12..16).contains(&x) && (2..15).contains(&y);
            let thumb = (30..38).contains(&x) && (20..25).contains(&y);
            // small skin-coloured distractor
            let wood = (70..74).contains(&(x + dx as i64)) && (2..6).contains(&(y + dy as i64));
            if palm || finger || thumb || wood {
                SKIN
            } else {
                [20, 20, 30]
            }
        })
    }

    #[test]
    fn black_image_reports_empty_mask() {
        let err = raster_features::<f64>(&RgbImage::filled(30, 30, [0, 0, 0]).into(), &PipelineConfig::default());
        assert_eq!(err, Err(PipelineError::Crop(CropError::EmptyMask)));
        assert!(err.unwrap_err().to_string().contains("EmptyMask"));
    }

    #[test]
    fn distractor_is_discarded() {
        let stages = segment(&scene(5, 5).into(), &PipelineConfig::default()).unwrap();
        assert!(stages.smoothed.get(71, 3));
        assert!(!stages.blob.get(71, 3));
        assert_eq!(stages.crop.width(), 50);
    }

    #[test]
    fn translated_scene_gives_identical_features() {
        let cfg = PipelineConfig::default();
        let a = raster_features::<f64>(&scene(0, 0).into(), &cfg).unwrap();
        let b = raster_features::<f64>(&scene(25, 30).into(), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bitmap_input_skips_skin_filter() {
        let mask = BinaryMask::from_fn(40, 40, |x, y| ((5..20).contains(&x) && (5..30).contains(&y)) || ((20..35).contains(&x) && (25..30).contains(&y)));
        let f = raster_features::<f64>(&mask.into(), &PipelineConfig::default()).unwrap();
        assert_eq!(f.values.len(), 5);
    }
}
