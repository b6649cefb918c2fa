//! Appearance features on a cell grid.
//!
//! Each patch is described by 42 channels per 4x4-pixel cell: 31
//! gradient-histogram channels, 10 color-attribute channels, and one
//! zero-centered grayscale channel (always the last channel). A raised-
//! cosine window tapers the grid toward its borders; it can be disabled
//! for analysis.

mod cn;
mod fhog;

use std::path::PathBuf;
use std::sync::Arc;

use ndarray::{Array1, Array2, Array3};

use crate::error::{Error, Result};
use crate::raster::Image;

pub use cn::{extract_cn, CnTable, CN_CHANNELS};
pub use fhog::{extract_fhog, HOG_CHANNELS};

/// Where the color lookup table comes from.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum CnSource {
    /// Procedurally generated builtin table.
    #[default]
    Builtin,
    /// Binary asset on disk (see [`CnTable::load`] for the layout).
    File(PathBuf),
    /// Skip color channels entirely (grayscale + gradients only).
    Off,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureConfig {
    /// Cell edge length in pixels.
    pub cell_size: usize,
    /// Apply the raised-cosine window.
    pub windowed: bool,
    pub cn: CnSource,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            cell_size: 4,
            windowed: true,
            cn: CnSource::Builtin,
        }
    }
}

/// Cell-grid feature tensor (rows x cols x channels).
#[derive(Debug, Clone)]
pub struct FeatureMap {
    pub data: Array3<f64>,
    pub cell_size: usize,
}

impl FeatureMap {
    /// (rows, cols) of the cell grid.
    pub fn grid(&self) -> (usize, usize) {
        let (h, w, _) = self.data.dim();
        (h, w)
    }

    pub fn channels(&self) -> usize {
        self.data.dim().2
    }

    /// Number of spatial samples (grid area).
    pub fn samples(&self) -> usize {
        let (h, w) = self.grid();
        h * w
    }

    /// Multiplies every channel elementwise by a cell-resolution mask.
    pub fn masked(&self, mask: &Array2<f64>) -> Result<FeatureMap> {
        let (h, w, d) = self.data.dim();
        if mask.dim() != (h, w) {
            return Err(Error::invalid_input(format!(
                "mask {:?} does not match feature grid {h}x{w}",
                mask.dim()
            )));
        }
        let mut data = self.data.clone();
        for y in 0..h {
            for x in 0..w {
                let m = mask[[y, x]];
                for c in 0..d {
                    data[[y, x, c]] *= m;
                }
            }
        }
        Ok(FeatureMap {
            data,
            cell_size: self.cell_size,
        })
    }

    /// Convex blend toward a new sample: `self = (1-eta)*self + eta*new`.
    pub fn blend(&mut self, new: &FeatureMap, eta: f64) {
        debug_assert_eq!(self.data.dim(), new.data.dim());
        self.data.zip_mut_with(&new.data, |a, &b| {
            *a = (1.0 - eta) * *a + eta * b;
        });
    }
}

/// Feature extractor with an optionally loaded color table.
#[derive(Clone)]
pub struct FeatureExtractor {
    cell_size: usize,
    windowed: bool,
    cn: Option<CnHandle>,
}

impl std::fmt::Debug for FeatureExtractor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FeatureExtractor")
            .field("cell_size", &self.cell_size)
            .field("windowed", &self.windowed)
            .field("color_channels", &self.cn.is_some())
            .finish()
    }
}

/// Either the process-wide builtin table or a loaded one.
#[derive(Clone)]
enum CnHandle {
    Static(&'static CnTable),
    Shared(Arc<CnTable>),
}

impl CnHandle {
    fn table(&self) -> &CnTable {
        match self {
            CnHandle::Static(t) => t,
            CnHandle::Shared(t) => t,
        }
    }
}

impl FeatureExtractor {
    /// Builds an extractor; loading a configured table file may fail with
    /// `MissingAsset` or `Format`.
    pub fn new(cfg: &FeatureConfig) -> Result<Self> {
        if cfg.cell_size == 0 {
            return Err(Error::invalid_config("cell size must be positive"));
        }
        let cn = match &cfg.cn {
            CnSource::Builtin => Some(CnHandle::Static(CnTable::builtin())),
            CnSource::File(path) => Some(CnHandle::Shared(Arc::new(CnTable::load(path)?))),
            CnSource::Off => None,
        };
        Ok(FeatureExtractor {
            cell_size: cfg.cell_size,
            windowed: cfg.windowed,
            cn,
        })
    }

    pub fn cell_size(&self) -> usize {
        self.cell_size
    }

    pub fn has_color(&self) -> bool {
        self.cn.is_some()
    }

    /// Total channel count D.
    pub fn channels(&self) -> usize {
        HOG_CHANNELS + if self.cn.is_some() { CN_CHANNELS } else { 0 } + 1
    }

    /// Extracts the stacked descriptor for one patch.
    pub fn extract(&self, patch: &Image) -> Result<FeatureMap> {
        let (h, w) = patch.dims();
        if h < self.cell_size || w < self.cell_size {
            return Err(Error::invalid_input(format!(
                "patch {h}x{w} smaller than one {0}x{0} cell",
                self.cell_size
            )));
        }
        let ch = h / self.cell_size;
        let cw = w / self.cell_size;
        let d = self.channels();
        let mut data = Array3::zeros((ch, cw, d));

        let hog = extract_fhog(patch, self.cell_size);
        data.slice_mut(ndarray::s![.., .., 0..HOG_CHANNELS])
            .assign(&hog);

        if let Some(handle) = &self.cn {
            let cnf = extract_cn(patch, self.cell_size, handle.table());
            data.slice_mut(ndarray::s![.., .., HOG_CHANNELS..HOG_CHANNELS + CN_CHANNELS])
                .assign(&cnf);
        }

        // Zero-centered grayscale cell means, always the last channel.
        let gray_idx = d - 1;
        let luma = patch.luma(0.299, 0.587, 0.114);
        let inv_area = 1.0 / (self.cell_size * self.cell_size) as f64;
        for cy in 0..ch {
            for cx in 0..cw {
                let mut sum = 0.0;
                for y in cy * self.cell_size..(cy + 1) * self.cell_size {
                    for x in cx * self.cell_size..(cx + 1) * self.cell_size {
                        sum += luma[[y, x]];
                    }
                }
                data[[cy, cx, gray_idx]] = sum * inv_area - 0.5;
            }
        }

        if self.windowed {
            let win = hann2d(ch, cw);
            for y in 0..ch {
                for x in 0..cw {
                    let wv = win[[y, x]];
                    for c in 0..d {
                        data[[y, x, c]] *= wv;
                    }
                }
            }
        }

        Ok(FeatureMap {
            data,
            cell_size: self.cell_size,
        })
    }
}

/// Raised-cosine (Hann) window of length `n`, endpoints at zero.
pub fn hann(n: usize) -> Array1<f64> {
    if n == 1 {
        return Array1::ones(1);
    }
    Array1::from_shape_fn(n, |i| {
        0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / (n as f64 - 1.0)).cos())
    })
}

/// Outer product of two 1-D raised-cosine windows.
pub fn hann2d(h: usize, w: usize) -> Array2<f64> {
    let wy = hann(h);
    let wx = hann(w);
    Array2::from_shape_fn((h, w), |(y, x)| wy[y] * wx[x])
}

/// Crops the search region around `center` (x, y) covering `area_scale`
/// times the target area (equal factor per axis) and resizes it to
/// `dst` = (width, height) pixels, replicating edges out of frame.
pub fn crop_patch(
    frame: &Image,
    center: (f64, f64),
    size: (f64, f64),
    area_scale: f64,
    dst: (usize, usize),
) -> Image {
    let axis = area_scale.max(0.0).sqrt();
    frame.crop_resize(center, (size.0 * axis, size.1 * axis), dst)
}
