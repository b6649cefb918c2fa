//! Deterministic synthetic scenes for tests and self-checks.
//!
//! A scene is a seeded noise background with one high-contrast checkered
//! square moving (and optionally zooming) along a scripted path. Frames are
//! pure functions of the frame index, so any frame can be regenerated
//! bit-identically without storing the whole sequence.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::geom::Rect;
use crate::raster::Image;

#[derive(Debug, Clone)]
pub struct SceneConfig {
    /// Frame size (height, width) in pixels.
    pub dims: (usize, usize),
    /// Target box on frame 0.
    pub target0: Rect,
    /// Target motion in pixels per frame (vx, vy).
    pub velocity: (f64, f64),
    /// Per-frame multiplicative size change (1.0 = rigid).
    pub zoom: f64,
    /// Global intensity multiplier applied to the finished frame.
    pub brightness: f64,
    /// Background noise amplitude around mid-gray.
    pub noise: f64,
    /// Box-blur passes over the noise field; > 0 yields spatially
    /// correlated clutter instead of per-pixel speckle.
    pub bg_smooth: usize,
    /// Seed for the background field.
    pub seed: u64,
    /// Number of frames the scripted path is defined for.
    pub frames: usize,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            dims: (240, 320),
            target0: Rect::from_center(60.0, 120.0, 40.0, 40.0),
            velocity: (3.0, 0.0),
            zoom: 1.0,
            brightness: 1.0,
            noise: 0.25,
            bg_smooth: 2,
            seed: 7,
            frames: 60,
        }
    }
}

/// Checker colors: strong contrast in both intensity and hue.
const CHECKER_A: (f64, f64, f64) = (0.92, 0.30, 0.18);
const CHECKER_B: (f64, f64, f64) = (0.12, 0.68, 0.86);
/// Checker cells across the target per axis.
const CHECKER_CELLS: f64 = 5.0;

#[derive(Debug, Clone)]
pub struct Scene {
    cfg: SceneConfig,
    background: Image,
}

impl Scene {
    pub fn new(cfg: SceneConfig) -> Scene {
        let (h, w) = cfg.dims;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut background = Image::zeros(h, w);
        for y in 0..h {
            for x in 0..w {
                let px = (
                    0.45 + cfg.noise * (rng.gen::<f64>() - 0.5),
                    0.45 + cfg.noise * (rng.gen::<f64>() - 0.5),
                    0.45 + cfg.noise * (rng.gen::<f64>() - 0.5),
                );
                background.set_pixel(y, x, px);
            }
        }
        for _ in 0..cfg.bg_smooth {
            box_blur3(&mut background);
        }
        Scene { cfg, background }
    }

    pub fn config(&self) -> &SceneConfig {
        &self.cfg
    }

    pub fn num_frames(&self) -> usize {
        self.cfg.frames
    }

    /// Ground-truth box on frame `i`.
    pub fn truth(&self, i: usize) -> Rect {
        let t = i as f64;
        let (cx0, cy0) = self.cfg.target0.center();
        let grow = self.cfg.zoom.powf(t);
        Rect::from_center(
            cx0 + self.cfg.velocity.0 * t,
            cy0 + self.cfg.velocity.1 * t,
            self.cfg.target0.w * grow,
            self.cfg.target0.h * grow,
        )
    }

    /// Renders frame `i`: background plus the checkered target with exact
    /// pixel-coverage blending at its (sub-pixel) boundary.
    pub fn frame(&self, i: usize) -> Image {
        let rect = self.truth(i);
        let mut out = self.background.clone();
        let (h, w) = out.dims();

        let y0 = rect.y.floor().max(0.0) as usize;
        let y1 = ((rect.y + rect.h).ceil() as isize).clamp(0, h as isize) as usize;
        let x0 = rect.x.floor().max(0.0) as usize;
        let x1 = ((rect.x + rect.w).ceil() as isize).clamp(0, w as isize) as usize;

        for y in y0..y1 {
            // Fraction of the pixel row [y, y+1) covered by the box.
            let cy = overlap(y as f64, rect.y, rect.y + rect.h);
            if cy <= 0.0 {
                continue;
            }
            for x in x0..x1 {
                let cx = overlap(x as f64, rect.x, rect.x + rect.w);
                if cx <= 0.0 {
                    continue;
                }
                let alpha = cx * cy;
                // Pattern sampled at the pixel center in target-local coords.
                let u = (x as f64 + 0.5 - rect.x) / rect.w;
                let v = (y as f64 + 0.5 - rect.y) / rect.h;
                let iu = (u.clamp(0.0, 0.999) * CHECKER_CELLS) as usize;
                let iv = (v.clamp(0.0, 0.999) * CHECKER_CELLS) as usize;
                let c = if (iu + iv).is_multiple_of(2) {
                    CHECKER_A
                } else {
                    CHECKER_B
                };
                let bg = out.pixel(y, x);
                out.set_pixel(
                    y,
                    x,
                    (
                        bg.0 * (1.0 - alpha) + c.0 * alpha,
                        bg.1 * (1.0 - alpha) + c.1 * alpha,
                        bg.2 * (1.0 - alpha) + c.2 * alpha,
                    ),
                );
            }
        }

        if (self.cfg.brightness - 1.0).abs() > 0.0 {
            out = out.scaled(self.cfg.brightness);
            out.clamp_unit();
        }
        out
    }

    /// Writes the scene as an on-disk sequence: `img/0001.png`-style frames
    /// plus `groundtruth_rect.txt` with 1-based "x,y,w,h" lines.
    pub fn write_sequence(&self, dir: &Path) -> Result<()> {
        let img_dir = dir.join("img");
        fs::create_dir_all(&img_dir).map_err(|e| crate::error::Error::io(&img_dir, e))?;
        let gt_path = dir.join("groundtruth_rect.txt");
        let mut gt = fs::File::create(&gt_path).map_err(|e| crate::error::Error::io(&gt_path, e))?;
        for i in 0..self.cfg.frames {
            let path = img_dir.join(format!("{:04}.png", i + 1));
            self.frame(i).save(&path)?;
            let r = self.truth(i);
            writeln!(gt, "{:.2},{:.2},{:.2},{:.2}", r.x + 1.0, r.y + 1.0, r.w, r.h)
                .map_err(|e| crate::error::Error::io(&gt_path, e))?;
        }
        Ok(())
    }
}

/// Length of the overlap between the unit interval [p, p+1) and [a, b).
fn overlap(p: f64, a: f64, b: f64) -> f64 {
    ((p + 1.0).min(b) - p.max(a)).max(0.0)
}

/// One pass of a 3x3 box blur with edge clamping.
fn box_blur3(img: &mut Image) {
    let (h, w) = img.dims();
    let src = img.clone();
    for y in 0..h {
        for x in 0..w {
            let mut acc = (0.0, 0.0, 0.0);
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let sy = (y as i64 + dy).clamp(0, h as i64 - 1) as usize;
                    let sx = (x as i64 + dx).clamp(0, w as i64 - 1) as usize;
                    let p = src.pixel(sy, sx);
                    acc = (acc.0 + p.0, acc.1 + p.1, acc.2 + p.2);
                }
            }
            img.set_pixel(y, x, (acc.0 / 9.0, acc.1 / 9.0, acc.2 / 9.0));
        }
    }
}
