//! Gradient-histogram cell descriptor (31 channels).
//!
//! Per cell: 18 contrast-sensitive orientation channels, 9
//! contrast-insensitive channels, and 4 block-energy channels. Gradients
//! use clamped central differences on the color channel with the largest
//! magnitude; orientations snap to the best of 18 signed directions;
//! spatial binning is bilinear over the cell grid; normalization runs over
//! the four 2x2 blocks containing each cell with truncation at 0.2.

use ndarray::{Array2, Array3};

use crate::raster::Image;

pub const HOG_CHANNELS: usize = 31;
const ORIENTATIONS: usize = 9;
const TRUNCATION: f64 = 0.2;
/// Tiny guard keeping the block normalizers finite on zero-energy cells.
const NORM_EPS: f64 = 1e-10;
/// Weight of the block-energy channels (1/sqrt(18)).
const ENERGY_WEIGHT: f64 = 0.235_702_260_395_515_84;

/// Extracts the descriptor on a `floor(h/cell) x floor(w/cell)` grid.
/// Pixels beyond the last full cell are ignored.
pub fn extract_fhog(patch: &Image, cell: usize) -> Array3<f64> {
    assert!(cell > 0);
    let (h, w) = patch.dims();
    let ch = h / cell;
    let cw = w / cell;
    let mut hist = Array3::<f64>::zeros((ch, cw, 2 * ORIENTATIONS));
    if ch == 0 || cw == 0 {
        return Array3::zeros((ch, cw, HOG_CHANNELS));
    }

    // Signed direction table for orientation snapping.
    let mut ux = [0.0; ORIENTATIONS];
    let mut uy = [0.0; ORIENTATIONS];
    for o in 0..ORIENTATIONS {
        let angle = std::f64::consts::PI * o as f64 / ORIENTATIONS as f64;
        ux[o] = angle.cos();
        uy[o] = angle.sin();
    }

    let data = patch.data();
    for y in 0..h {
        let ym = y.saturating_sub(1);
        let yp = (y + 1).min(h - 1);
        for x in 0..w {
            let xm = x.saturating_sub(1);
            let xp = (x + 1).min(w - 1);

            // Strongest color-channel gradient wins.
            let mut dx = 0.0;
            let mut dy = 0.0;
            let mut best = -1.0;
            for c in 0..3 {
                let gx = data[[y, xp, c]] - data[[y, xm, c]];
                let gy = data[[yp, x, c]] - data[[ym, x, c]];
                let mag = gx * gx + gy * gy;
                if mag > best {
                    best = mag;
                    dx = gx;
                    dy = gy;
                }
            }
            let v = best.max(0.0).sqrt();
            if v == 0.0 {
                continue;
            }

            let mut best_dot = 0.0;
            let mut best_o = 0usize;
            for o in 0..ORIENTATIONS {
                let dot = ux[o] * dx + uy[o] * dy;
                if dot > best_dot {
                    best_dot = dot;
                    best_o = o;
                } else if -dot > best_dot {
                    best_dot = -dot;
                    best_o = o + ORIENTATIONS;
                }
            }

            // Bilinear vote into the four neighboring cells.
            let cx = (x as f64 + 0.5) / cell as f64 - 0.5;
            let cy = (y as f64 + 0.5) / cell as f64 - 0.5;
            let ix = cx.floor();
            let iy = cy.floor();
            let fx = cx - ix;
            let fy = cy - iy;
            let ix = ix as isize;
            let iy = iy as isize;
            for (gy, wy) in [(iy, 1.0 - fy), (iy + 1, fy)] {
                if gy < 0 || gy >= ch as isize || wy == 0.0 {
                    continue;
                }
                for (gx, wx) in [(ix, 1.0 - fx), (ix + 1, fx)] {
                    if gx < 0 || gx >= cw as isize || wx == 0.0 {
                        continue;
                    }
                    hist[[gy as usize, gx as usize, best_o]] += v * wy * wx;
                }
            }
        }
    }

    // Orientation-folded gradient energy per cell.
    let energy = Array2::from_shape_fn((ch, cw), |(y, x)| {
        (0..ORIENTATIONS)
            .map(|o| {
                let s = hist[[y, x, o]] + hist[[y, x, o + ORIENTATIONS]];
                s * s
            })
            .sum::<f64>()
    });

    let block = |y: isize, x: isize| -> f64 {
        let y = y.clamp(0, ch as isize - 1) as usize;
        let x = x.clamp(0, cw as isize - 1) as usize;
        energy[[y, x]]
    };

    let mut out = Array3::zeros((ch, cw, HOG_CHANNELS));
    for y in 0..ch {
        for x in 0..cw {
            let yi = y as isize;
            let xi = x as isize;
            // One normalizer per 2x2 block containing this cell.
            let mut norms = [0.0; 4];
            for (k, (oy, ox)) in [(-1, -1), (-1, 1), (1, -1), (1, 1)].iter().enumerate() {
                let sum = block(yi, xi)
                    + block(yi + oy, xi)
                    + block(yi, xi + ox)
                    + block(yi + oy, xi + ox);
                norms[k] = 1.0 / (sum + NORM_EPS).sqrt();
            }

            let mut texture = [0.0; 4];
            for o in 0..2 * ORIENTATIONS {
                let hval = hist[[y, x, o]];
                let mut acc = 0.0;
                for (k, n) in norms.iter().enumerate() {
                    let t = (hval * n).min(TRUNCATION);
                    acc += t;
                    texture[k] += t;
                }
                out[[y, x, o]] = 0.5 * acc;
            }
            for o in 0..ORIENTATIONS {
                let hval = hist[[y, x, o]] + hist[[y, x, o + ORIENTATIONS]];
                let acc: f64 = norms.iter().map(|n| (hval * n).min(TRUNCATION)).sum();
                out[[y, x, 2 * ORIENTATIONS + o]] = 0.5 * acc;
            }
            for k in 0..4 {
                out[[y, x, 27 + k]] = ENERGY_WEIGHT * texture[k];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_patch_has_zero_descriptor() {
        let img = Image::from_fn(32, 32, |_, _| (0.4, 0.4, 0.4));
        let f = extract_fhog(&img, 4);
        assert_eq!(f.dim(), (8, 8, 31));
        assert!(f.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn vertical_edge_excites_horizontal_gradient_bins() {
        // Left half dark, right half bright: gradients point along +x,
        // orientation bin 0 (direction (1,0)).
        let img = Image::from_fn(32, 32, |_, x| {
            let v = if x < 16 { 0.1 } else { 0.9 };
            (v, v, v)
        });
        let f = extract_fhog(&img, 4);
        // Cells straddling the edge (columns 3 and 4) carry the energy.
        let on_edge: f64 = (0..8).map(|y| f[[y, 3, 0]] + f[[y, 4, 0]]).sum();
        let off_edge: f64 = (0..8).map(|y| f[[y, 1, 0]]).sum();
        assert!(on_edge > 0.5);
        assert!(off_edge.abs() < 1e-12);
        // No energy in the orthogonal orientation bin (direction (0,1), bin 4/5 region).
        let orthogonal: f64 = (0..8).map(|y| f[[y, 3, 4]] + f[[y, 4, 5]]).sum();
        assert!(orthogonal < 1e-9);
    }

    #[test]
    fn descriptor_is_contrast_truncated() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let img = Image::from_fn(40, 40, |_, _| (rng.gen(), rng.gen(), rng.gen()));
        let f = extract_fhog(&img, 4);
        for &v in f.iter() {
            assert!(v.is_finite());
            // 0.5 * 4 blocks * 0.2 truncation = 0.4 channel cap;
            // texture channels cap at 0.2357 * 18 * 0.2.
            assert!(v <= 0.2357 * 18.0 * 0.2 + 1e-9);
            assert!(v >= 0.0);
        }
    }

    #[test]
    fn shift_by_one_cell_shifts_descriptor() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        // Smooth-ish random field, 72x72, compared over two 64x64 crops
        // offset by exactly one 4px cell in both axes.
        let base = Image::from_fn(72, 72, |y, x| {
            let v = 0.5
                + 0.3 * ((x as f64 * 0.31).sin() * (y as f64 * 0.17).cos())
                + 0.1 * (rng.gen::<f64>() - 0.5);
            (v, v * 0.8, v * 0.6)
        });
        let crop_a = base.crop_resize((33.5, 33.5), (64.0, 64.0), (64, 64));
        let crop_b = base.crop_resize((37.5, 37.5), (64.0, 64.0), (64, 64));
        let fa = extract_fhog(&crop_a, 4);
        let fb = extract_fhog(&crop_b, 4);
        // Interior cells must match one cell over. Cells closer than two
        // cells to a crop border see clamped gradient stencils or
        // normalizer blocks that differ between the two crops.
        for y in 2..13 {
            for x in 2..13 {
                for c in 0..31 {
                    let a = fa[[y + 1, x + 1, c]];
                    let b = fb[[y, x, c]];
                    assert!(
                        (a - b).abs() < 1e-6,
                        "cell ({y},{x}) ch {c}: {a} vs {b}"
                    );
                }
            }
        }
    }
}
