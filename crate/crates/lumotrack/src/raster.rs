//! RGB raster type used throughout the pipeline.
//!
//! All arithmetic happens on `f64` intensities normalized to `[0,1]`;
//! conversion from 8-bit image files divides by 255 on load and multiplies
//! back on save.

use std::path::Path;

use ndarray::{Array2, Array3};

use crate::error::{Error, Result};

/// An H x W x 3 raster with channel intensities in `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    data: Array3<f64>,
}

impl Image {
    /// Wraps an (H, W, 3) array. Fails on empty or non-3-channel shapes.
    pub fn new(data: Array3<f64>) -> Result<Self> {
        let (h, w, c) = data.dim();
        if h == 0 || w == 0 {
            return Err(Error::invalid_input("empty image"));
        }
        if c != 3 {
            return Err(Error::invalid_input(format!(
                "expected 3 channels, got {c}"
            )));
        }
        Ok(Image { data })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Image {
            data: Array3::zeros((height, width, 3)),
        }
    }

    /// Builds an image from a per-pixel closure returning (r, g, b).
    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> (f64, f64, f64),
    ) -> Self {
        let mut data = Array3::zeros((height, width, 3));
        for y in 0..height {
            for x in 0..width {
                let (r, g, b) = f(y, x);
                data[[y, x, 0]] = r;
                data[[y, x, 1]] = g;
                data[[y, x, 2]] = b;
            }
        }
        Image { data }
    }

    pub fn height(&self) -> usize {
        self.data.dim().0
    }

    pub fn width(&self) -> usize {
        self.data.dim().1
    }

    /// (height, width)
    pub fn dims(&self) -> (usize, usize) {
        let (h, w, _) = self.data.dim();
        (h, w)
    }

    pub fn data(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut Array3<f64> {
        &mut self.data
    }

    #[inline]
    pub fn pixel(&self, y: usize, x: usize) -> (f64, f64, f64) {
        (
            self.data[[y, x, 0]],
            self.data[[y, x, 1]],
            self.data[[y, x, 2]],
        )
    }

    #[inline]
    pub fn set_pixel(&mut self, y: usize, x: usize, rgb: (f64, f64, f64)) {
        self.data[[y, x, 0]] = rgb.0;
        self.data[[y, x, 1]] = rgb.1;
        self.data[[y, x, 2]] = rgb.2;
    }

    /// Multiplies every intensity by `k` (no clamping).
    pub fn scaled(&self, k: f64) -> Self {
        Image {
            data: &self.data * k,
        }
    }

    /// Clamps all intensities into `[0,1]` in place.
    pub fn clamp_unit(&mut self) {
        self.data.mapv_inplace(|v| v.clamp(0.0, 1.0));
    }

    /// Luma plane under the given channel weights.
    pub fn luma(&self, wr: f64, wg: f64, wb: f64) -> Array2<f64> {
        let (h, w) = self.dims();
        Array2::from_shape_fn((h, w), |(y, x)| {
            wr * self.data[[y, x, 0]] + wg * self.data[[y, x, 1]] + wb * self.data[[y, x, 2]]
        })
    }

    /// Crops the axis-aligned region of size `src_size` (w, h) centered at
    /// `center` (x, y) and resizes it to `dst_size` (w, h) with bilinear
    /// sampling. Samples outside the frame replicate the nearest edge pixel.
    ///
    /// Coordinates are 0-based with pixel centers at integer positions, so
    /// an integral-aligned crop with `src_size == dst_size` is an exact
    /// sub-raster copy.
    pub fn crop_resize(
        &self,
        center: (f64, f64),
        src_size: (f64, f64),
        dst_size: (usize, usize),
    ) -> Image {
        let (h, w) = self.dims();
        let (dst_w, dst_h) = dst_size;
        let (src_w, src_h) = src_size;
        let sx = src_w / dst_w as f64;
        let sy = src_h / dst_h as f64;
        // Left/top edge of the source region in frame coordinates.
        let x0 = center.0 - (src_w - 1.0) / 2.0;
        let y0 = center.1 - (src_h - 1.0) / 2.0;

        let mut out = Array3::zeros((dst_h, dst_w, 3));
        for dy in 0..dst_h {
            // Map the destination pixel center onto the source grid.
            let fy = y0 + (dy as f64 + 0.5) * sy - 0.5;
            let (iy0, iy1, wy) = clamped_lerp_coords(fy, h);
            for dx in 0..dst_w {
                let fx = x0 + (dx as f64 + 0.5) * sx - 0.5;
                let (ix0, ix1, wx) = clamped_lerp_coords(fx, w);
                for c in 0..3 {
                    let v00 = self.data[[iy0, ix0, c]];
                    let v01 = self.data[[iy0, ix1, c]];
                    let v10 = self.data[[iy1, ix0, c]];
                    let v11 = self.data[[iy1, ix1, c]];
                    let top = v00 + (v01 - v00) * wx;
                    let bot = v10 + (v11 - v10) * wx;
                    out[[dy, dx, c]] = top + (bot - top) * wy;
                }
            }
        }
        Image { data: out }
    }

    /// Loads a PNG/JPEG/etc. file into a normalized raster.
    pub fn load(path: impl AsRef<Path>) -> Result<Image> {
        let path = path.as_ref();
        let img = image::open(path).map_err(|e| Error::Image {
            path: path.to_path_buf(),
            source: e,
        })?;
        let rgb = img.to_rgb8();
        let (w, h) = rgb.dimensions();
        let mut data = Array3::zeros((h as usize, w as usize, 3));
        for (x, y, p) in rgb.enumerate_pixels() {
            for c in 0..3 {
                data[[y as usize, x as usize, c]] = p.0[c] as f64 / 255.0;
            }
        }
        Image::new(data)
    }

    /// Saves to a raster file; format inferred from the extension.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let (h, w) = self.dims();
        let mut buf = image::RgbImage::new(w as u32, h as u32);
        for (x, y, p) in buf.enumerate_pixels_mut() {
            for c in 0..3 {
                let v = self.data[[y as usize, x as usize, c]].clamp(0.0, 1.0);
                p.0[c] = (v * 255.0).round() as u8;
            }
        }
        buf.save(path).map_err(|e| Error::Image {
            path: path.to_path_buf(),
            source: e,
        })
    }
}

/// Saves a `[0,1]` scalar map as a grayscale image (used by mask dumps).
pub fn save_gray(map: &Array2<f64>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (h, w) = map.dim();
    let mut buf = image::GrayImage::new(w as u32, h as u32);
    for (x, y, p) in buf.enumerate_pixels_mut() {
        let v = map[[y as usize, x as usize]].clamp(0.0, 1.0);
        p.0[0] = (v * 255.0).round() as u8;
    }
    buf.save(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Floor/ceil sample indices clamped to `[0, len)` plus the fractional
/// weight of the upper index. Out-of-range coordinates replicate the edge.
#[inline]
fn clamped_lerp_coords(f: f64, len: usize) -> (usize, usize, f64) {
    let max = (len - 1) as f64;
    if f <= 0.0 {
        (0, 0, 0.0)
    } else if f >= max {
        (len - 1, len - 1, 0.0)
    } else {
        let i0 = f.floor();
        let frac = f - i0;
        let i0 = i0 as usize;
        (i0, (i0 + 1).min(len - 1), frac)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient_image(h: usize, w: usize) -> Image {
        Image::from_fn(h, w, |y, x| {
            let v = (y * w + x) as f64 / (h * w) as f64;
            (v, v * 0.5, 1.0 - v)
        })
    }

    #[test]
    fn aligned_crop_is_exact_copy() {
        let img = gradient_image(20, 30);
        // 7x5 region centered at (10, 8): left edge 10-3=7, top 8-2=6.
        let crop = img.crop_resize((10.0, 8.0), (7.0, 5.0), (7, 5));
        for y in 0..5 {
            for x in 0..7 {
                assert_eq!(crop.pixel(y, x), img.pixel(6 + y, 7 + x));
            }
        }
    }

    #[test]
    fn out_of_frame_replicates_edges() {
        let img = gradient_image(8, 8);
        // 7x7 crop centered at the top-left corner: destination sample
        // positions land on source columns/rows dx-3, clamped at the edge.
        let crop = img.crop_resize((0.0, 0.0), (7.0, 7.0), (7, 7));
        assert_eq!(crop.pixel(0, 0), img.pixel(0, 0));
        assert_eq!(crop.pixel(0, 2), img.pixel(0, 0));
        assert_eq!(crop.pixel(2, 0), img.pixel(0, 0));
        assert_eq!(crop.pixel(2, 5), img.pixel(0, 2));
        // Bottom-right of the crop lands inside the frame.
        assert_eq!(crop.pixel(6, 6), img.pixel(3, 3));
    }

    #[test]
    fn resize_uniform_stays_uniform() {
        let img = Image::from_fn(16, 16, |_, _| (0.25, 0.5, 0.75));
        let crop = img.crop_resize((7.5, 7.5), (16.0, 16.0), (5, 9));
        assert_eq!(crop.dims(), (9, 5));
        for y in 0..9 {
            for x in 0..5 {
                let (r, g, b) = crop.pixel(y, x);
                assert!((r - 0.25).abs() < 1e-12);
                assert!((g - 0.5).abs() < 1e-12);
                assert!((b - 0.75).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn luma_weights_apply_per_pixel() {
        let img = Image::from_fn(2, 2, |y, x| ((y as f64) * 0.1, (x as f64) * 0.2, 0.3));
        let l = img.luma(0.299, 0.587, 0.114);
        assert!((l[[1, 1]] - (0.299 * 0.1 + 0.587 * 0.2 + 0.114 * 0.3)).abs() < 1e-12);
    }
}
