//! Target-aware binary mask from the illuminance-change plane.
//!
//! The mean and standard deviation of the change plane over the centered
//! target-sized window define a three-sigma acceptance band; pixels inside
//! the band form the raw mask, which is then gated to zero outside the
//! window so that similarly-lit background cannot leak in. A cell-level
//! pooling step aligns the mask with the feature grid.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Integer rectangle in patch coordinates (top-left corner plus size).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridRect {
    pub x0: usize,
    pub y0: usize,
    pub w: usize,
    pub h: usize,
}

impl GridRect {
    /// Rectangle of size `(w, h)` centered (floor-aligned) in a
    /// `patch_h x patch_w` grid.
    pub fn centered(patch_h: usize, patch_w: usize, h: usize, w: usize) -> GridRect {
        let h = h.min(patch_h);
        let w = w.min(patch_w);
        GridRect {
            x0: (patch_w - w) / 2,
            y0: (patch_h - h) / 2,
            w,
            h,
        }
    }

    pub fn contains(&self, y: usize, x: usize) -> bool {
        y >= self.y0 && y < self.y0 + self.h && x >= self.x0 && x < self.x0 + self.w
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }
}

/// Binary masks (stored as 0.0/1.0 planes) plus the window statistics
/// they were derived from.
#[derive(Debug, Clone)]
pub struct TargetAwareMask {
    /// Three-sigma band test over the whole plane.
    pub raw: Array2<f64>,
    /// `raw` zeroed outside the window.
    pub gated: Array2<f64>,
    /// Cell-resolution pooling of `gated`; empty until
    /// [`TargetAwareMask::attach_cell_mask`] is called.
    pub cell: Array2<f64>,
    pub mu: f64,
    pub sigma: f64,
}

impl TargetAwareMask {
    /// Pools the gated mask onto the feature cell grid.
    pub fn attach_cell_mask(&mut self, cell_size: usize) {
        self.cell = downsample_mask(&self.gated, cell_size);
    }
}

/// Builds the mask for a change plane given the centered window that is
/// presumed to hold the target.
pub fn generate_mask(theta: &Array2<f64>, window: GridRect) -> Result<TargetAwareMask> {
    let (h, w) = theta.dim();
    if window.area() == 0 {
        return Err(Error::invalid_input("mask window has zero area"));
    }
    if window.y0 + window.h > h || window.x0 + window.w > w {
        return Err(Error::invalid_input(format!(
            "mask window {window:?} exceeds plane bounds {h}x{w}"
        )));
    }

    let n = window.area();
    let mut sum = 0.0;
    for y in window.y0..window.y0 + window.h {
        for x in window.x0..window.x0 + window.w {
            sum += theta[[y, x]];
        }
    }
    let mu = sum / n as f64;
    let sigma = if n > 1 {
        let mut ss = 0.0;
        for y in window.y0..window.y0 + window.h {
            for x in window.x0..window.x0 + window.w {
                let d = theta[[y, x]] - mu;
                ss += d * d;
            }
        }
        (ss / (n - 1) as f64).sqrt()
    } else {
        0.0
    };

    let lo = mu - 3.0 * sigma;
    let hi = mu + 3.0 * sigma;
    let raw = theta.mapv(|v| if v >= lo && v <= hi { 1.0 } else { 0.0 });
    let gated = Array2::from_shape_fn((h, w), |(y, x)| {
        if window.contains(y, x) {
            raw[[y, x]]
        } else {
            0.0
        }
    });

    Ok(TargetAwareMask {
        raw,
        gated,
        cell: Array2::zeros((0, 0)),
        mu,
        sigma,
    })
}

/// Majority-vote pooling of a binary plane onto a cell grid: a cell is 1
/// iff at least half of its pixels are 1. Trailing partial cells pool over
/// the pixels they actually cover.
pub fn downsample_mask(gated: &Array2<f64>, cell_size: usize) -> Array2<f64> {
    assert!(cell_size > 0, "cell size must be positive");
    let (h, w) = gated.dim();
    let ch = h.div_ceil(cell_size);
    let cw = w.div_ceil(cell_size);
    Array2::from_shape_fn((ch, cw), |(cy, cx)| {
        let y1 = ((cy + 1) * cell_size).min(h);
        let x1 = ((cx + 1) * cell_size).min(w);
        let mut sum = 0.0;
        let mut count = 0usize;
        for y in cy * cell_size..y1 {
            for x in cx * cell_size..x1 {
                sum += gated[[y, x]];
                count += 1;
            }
        }
        if sum / count as f64 >= 0.5 {
            1.0
        } else {
            0.0
        }
    })
}
