//! Pipeline settings and the plain-text `key=value` configuration format.

use std::str::FromStr;

use thiserror::Error;

use crate::classifier::Level1Rule;
use crate::cropper::DEFAULT_CROP_SIDE;
use crate::features::DEFAULT_EIGEN_COUNT;
use crate::segmenter::{SkinRange, SkinRangeError};

pub const DEFAULT_SMOOTH_RADIUS: usize = 2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected 'key=value'")]
    Syntax { line: usize },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value for '{key}': {value}")]
    BadValue { line: usize, key: String, value: String },
    #[error(transparent)]
    Skin(#[from] SkinRangeError),
    #[error("{0} must be at least 1")]
    Zero(&'static str),
}

/// Parameters of the image-to-features pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub skin: SkinRange,
    pub smooth_radius: usize,
    pub crop_side: usize,
    pub eigen_count: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            skin: SkinRange::default(),
            smooth_radius: DEFAULT_SMOOTH_RADIUS,
            crop_side: DEFAULT_CROP_SIDE,
            eigen_count: DEFAULT_EIGEN_COUNT,
        }
    }
}

/// Partial settings, as read from a config file or command-line flags.
/// Later layers override earlier ones via [`Overrides::merge`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub hue_lo: Option<f64>,
    pub hue_hi: Option<f64>,
    pub sat_lo: Option<f64>,
    pub sat_hi: Option<f64>,
    pub smooth_radius: Option<usize>,
    pub crop_side: Option<usize>,
    pub eigen_count: Option<usize>,
    pub level1_rule: Option<Level1Rule>,
}

impl Overrides {
    /// Fields set in `top` win over fields set in `self`.
    pub fn merge(self, top: Overrides) -> Overrides {
        Overrides {
            hue_lo: top.hue_lo.or(self.hue_lo),
            hue_hi: top.hue_hi.or(self.hue_hi),
            sat_lo: top.sat_lo.or(self.sat_lo),
            sat_hi: top.sat_hi.or(self.sat_hi),
            smooth_radius: top.smooth_radius.or(self.smooth_radius),
            crop_side: top.crop_side.or(self.crop_side),
            eigen_count: top.eigen_count.or(self.eigen_count),
            level1_rule: top.level1_rule.or(self.level1_rule),
        }
    }

    /// Fills unset fields from the defaults and validates the result.
    pub fn resolve(&self) -> Result<(PipelineConfig, Level1Rule), ConfigError> {
        let d = PipelineConfig::default();
        let (h_lo, h_hi) = d.skin.hue();
        let (s_lo, s_hi) = d.skin.saturation();
        let skin = SkinRange::new(
            self.hue_lo.unwrap_or(h_lo),
            self.hue_hi.unwrap_or(h_hi),
            self.sat_lo.unwrap_or(s_lo),
            self.sat_hi.unwrap_or(s_hi),
        )?;
        let crop_side = self.crop_side.unwrap_or(d.crop_side);
        if crop_side == 0 {
            return Err(ConfigError::Zero("crop-side"));
        }
        let eigen_count = self.eigen_count.unwrap_or(d.eigen_count);
        if eigen_count == 0 {
            return Err(ConfigError::Zero("eigen-count"));
        }
        let cfg = PipelineConfig {
            skin,
            smooth_radius: self.smooth_radius.unwrap_or(d.smooth_radius),
            crop_side,
            eigen_count,
        };
        Ok((cfg, self.level1_rule.unwrap_or_default()))
    }
}

fn parse_value<V: FromStr>(line: usize, key: &str, value: &str) -> Result<V, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue { line, key: key.into(), value: value.into() })
}

/// Parses `key=value` lines. Blank lines and lines starting with `#` are
/// ignored; keys accept either dashes or underscores.
pub fn parse_config(text: &str) -> Result<Overrides, ConfigError> {
    let mut o = Overrides::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or(ConfigError::Syntax { line })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        match key.as_str() {
            "hue-lo" => o.hue_lo = Some(parse_value(line, &key, value)?),
            "hue-hi" => o.hue_hi = Some(parse_value(line, &key, value)?),
            "sat-lo" => o.sat_lo = Some(parse_value(line, &key, value)?),
            "sat-hi" => o.sat_hi = Some(parse_value(line, &key, value)?),
            "smooth-radius" => o.smooth_radius = Some(parse_value(line, &key, value)?),
            "crop-side" => o.crop_side = Some(parse_value(line, &key, value)?),
            "eigen-count" => o.eigen_count = Some(parse_value(line, &key, value)?),
            "level1-rule" => o.level1_rule = Some(parse_value(line, &key, value)?),
            _ => return Err(ConfigError::UnknownKey { line, key }),
        }
    }
    Ok(o)
}
