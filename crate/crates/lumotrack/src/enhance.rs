//! Low-light tone mapping and the illuminance-change plane.
//!
//! Night frames are brightened by a logarithmic global adaptation factor:
//! every channel of a pixel is multiplied by the same ratio, so hue is
//! preserved. The difference between the illuminance plane before and
//! after enhancement (computed unclamped) feeds the target-aware mask.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::illum::{log_average_luminance, world_illuminance, IlluminanceConfig, LuminanceMap};
use crate::raster::Image;

/// Per-patch enhancement state: the illuminance plane, its adaptation
/// factors, and the illuminance-change plane.
#[derive(Debug, Clone)]
pub struct EnhancementMaps {
    pub l_w: LuminanceMap,
    /// Target brightness per pixel, in `[0,1]`.
    pub l_g: Array2<f64>,
    /// Illuminance change: original minus (unclamped) enhanced plane.
    pub theta: Array2<f64>,
    /// Set when the input had no light at all; enhancement is then the
    /// identity and `theta` is zero.
    pub degenerate: bool,
}

impl EnhancementMaps {
    /// Builds the full set of maps for one image. `l_tilde` is the
    /// log-average luminance steering the adaptation strength.
    pub fn compute(image: &Image, cfg: &IlluminanceConfig, l_tilde: f64) -> Result<Self> {
        let l_w = world_illuminance(image, cfg)?;
        match global_adaptation(&l_w, l_tilde) {
            Ok(l_g) => {
                // Unclamped enhanced plane: scaling all channels by
                // l_g/l_w replaces the illuminance value with l_g, so the
                // change plane is just l_w - l_g wherever l_w > 0.
                let theta = Array2::from_shape_fn(l_w.dims(), |idx| {
                    if l_w.values[idx] > 0.0 {
                        l_w.values[idx] - l_g[idx]
                    } else {
                        0.0
                    }
                });
                Ok(EnhancementMaps {
                    l_w,
                    l_g,
                    theta,
                    degenerate: false,
                })
            }
            Err(Error::DegenerateInput(_)) => {
                let dims = l_w.dims();
                Ok(EnhancementMaps {
                    l_w,
                    l_g: Array2::ones(dims),
                    theta: Array2::zeros(dims),
                    degenerate: true,
                })
            }
            Err(e) => Err(e),
        }
    }
}

/// Logarithmic adaptation factor per pixel, normalized so the brightest
/// pixel maps to 1.
pub fn global_adaptation(l_w: &LuminanceMap, l_tilde: f64) -> Result<Array2<f64>> {
    if l_w.values.is_empty() {
        return Err(Error::invalid_input("empty luminance map"));
    }
    if l_tilde <= 0.0 {
        return Err(Error::invalid_input("log-average luminance must be positive"));
    }
    let l_max = l_w.max();
    if l_max <= 0.0 {
        return Err(Error::DegenerateInput(
            "all-dark image has no reference brightness".into(),
        ));
    }
    let denom = (l_max / l_tilde + 1.0).ln();
    Ok(l_w.values.mapv(|v| (v / l_tilde + 1.0).ln() / denom))
}

/// Applies the adaptation maps to an image and clamps to `[0,1]`.
/// Pixels with zero illuminance pass through unchanged.
pub fn enhance_image(image: &Image, maps: &EnhancementMaps) -> Result<Image> {
    let mut out = enhance_unclamped(image, maps)?;
    out.clamp_unit();
    Ok(out)
}

/// Same as [`enhance_image`] without the final clamp; used for analysis
/// of the enhancement itself (the change plane is defined unclamped).
pub fn enhance_unclamped(image: &Image, maps: &EnhancementMaps) -> Result<Image> {
    let (h, w) = image.dims();
    if maps.l_w.dims() != (h, w) || maps.l_g.dim() != (h, w) {
        return Err(Error::invalid_input("enhancement maps do not match image shape"));
    }
    let mut out = image.clone();
    for y in 0..h {
        for x in 0..w {
            let lw = maps.l_w.values[[y, x]];
            if lw > 0.0 {
                let k = maps.l_g[[y, x]] / lw;
                let (r, g, b) = image.pixel(y, x);
                out.set_pixel(y, x, (r * k, g * k, b * k));
            }
        }
    }
    Ok(out)
}

/// Illuminance-change plane of a standalone image: the difference between
/// its illuminance plane and the plane of its (unclamped) enhancement.
/// Returns the plane and a degenerate-input flag (all-black image).
pub fn illuminance_change(image: &Image, cfg: &IlluminanceConfig) -> Result<(Array2<f64>, bool)> {
    let l_w = world_illuminance(image, cfg)?;
    let l_tilde = log_average_luminance(&l_w, cfg.delta)?;
    let maps = EnhancementMaps::compute(image, cfg, l_tilde)?;
    Ok((maps.theta, maps.degenerate))
}

/// Enhance a standalone patch, deriving the adaptation level from the patch
/// itself. Degenerate (all-black) patches pass through unchanged.
pub fn enhance_patch(patch: &Image, cfg: &IlluminanceConfig) -> Result<Image> {
    let l_w = world_illuminance(patch, cfg)?;
    let l_tilde = log_average_luminance(&l_w, cfg.delta)?;
    let maps = EnhancementMaps::compute(patch, cfg, l_tilde)?;
    if maps.degenerate {
        return Ok(patch.clone());
    }
    enhance_image(patch, &maps)
}
