//! Scene illuminance estimation and day/night classification.
//!
//! A per-pixel illuminance plane is formed as a weighted sum of the RGB
//! channels; its log-average summarizes the scene brightness, and a single
//! threshold on that scalar decides whether the sequence runs in day or
//! night mode.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::Image;

/// Weights and thresholds for illuminance estimation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IlluminanceConfig {
    /// Red channel weight.
    pub alpha_r: f64,
    /// Green channel weight.
    pub alpha_g: f64,
    /// Blue channel weight.
    pub alpha_b: f64,
    /// Offset added inside the log so zero pixels stay finite.
    pub delta: f64,
    /// Log-average luminance below which a scene counts as night.
    pub tau: f64,
}

impl Default for IlluminanceConfig {
    fn default() -> Self {
        IlluminanceConfig {
            alpha_r: 0.299,
            alpha_g: 0.587,
            alpha_b: 0.114,
            delta: 1e-4,
            tau: 0.15,
        }
    }
}

impl IlluminanceConfig {
    /// Checks weight normalization, positivity of `delta`, and `tau` range.
    pub fn validate(&self) -> Result<()> {
        let sum = self.alpha_r + self.alpha_g + self.alpha_b;
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid_config(format!(
                "channel weights must sum to 1, got {sum}"
            )));
        }
        if self.alpha_r < 0.0 || self.alpha_g < 0.0 || self.alpha_b < 0.0 {
            return Err(Error::invalid_config("channel weights must be nonnegative"));
        }
        if self.delta <= 0.0 {
            return Err(Error::invalid_config("delta must be positive"));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::invalid_config("tau must lie in (0,1)"));
        }
        Ok(())
    }
}

/// Per-pixel illuminance plane; values stay in `[0,1]` for unit-range
/// images and normalized weights.
#[derive(Debug, Clone, PartialEq)]
pub struct LuminanceMap {
    pub values: Array2<f64>,
}

impl LuminanceMap {
    pub fn dims(&self) -> (usize, usize) {
        self.values.dim()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Day/night operating mode; fixed once per sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LightMode {
    Day,
    Night,
}

impl std::fmt::Display for LightMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LightMode::Day => write!(f, "day"),
            LightMode::Night => write!(f, "night"),
        }
    }
}

impl std::str::FromStr for LightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "day" => Ok(LightMode::Day),
            "night" => Ok(LightMode::Night),
            other => Err(Error::invalid_input(format!(
                "unknown light mode {other:?} (expected day or night)"
            ))),
        }
    }
}

/// Weighted channel sum per pixel.
pub fn world_illuminance(image: &Image, cfg: &IlluminanceConfig) -> Result<LuminanceMap> {
    cfg.validate()?;
    let (h, w) = image.dims();
    if h == 0 || w == 0 {
        return Err(Error::invalid_input("empty image"));
    }
    Ok(LuminanceMap {
        values: image.luma(cfg.alpha_r, cfg.alpha_g, cfg.alpha_b),
    })
}

/// `exp` of the mean log-illuminance, offset by `delta` to keep zeros finite.
pub fn log_average_luminance(map: &LuminanceMap, delta: f64) -> Result<f64> {
    let n = map.values.len();
    if n == 0 {
        return Err(Error::invalid_input("empty luminance map"));
    }
    if delta <= 0.0 {
        return Err(Error::invalid_config("delta must be positive"));
    }
    let mean_log = map.values.iter().map(|&v| (delta + v).ln()).sum::<f64>() / n as f64;
    Ok(mean_log.exp())
}

/// Night iff the log-average luminance falls strictly below `tau`.
pub fn classify_light(l_tilde: f64, tau: f64) -> LightMode {
    if l_tilde < tau {
        LightMode::Night
    } else {
        LightMode::Day
    }
}
