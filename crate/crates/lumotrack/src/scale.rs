//! One-dimensional scale-space correlation filter.
//!
//! After translation is settled, a symmetric pyramid of S crops at sizes
//! a^k * size is reduced to fixed-length gradient-feature columns, and a
//! regularized correlation filter over the scale axis scores each size
//! hypothesis. The argmax gives the relative size change a^{k*}. Learning
//! keeps numerator/denominator accumulators in the scale-DFT domain and
//! blends them with a fixed rate.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::enhance::enhance_patch;
use crate::error::{Error, Result};
use crate::features::{crop_patch, extract_fhog, hann, HOG_CHANNELS};
use crate::fft2::{fft1_real, ifft1_real};
use crate::illum::IlluminanceConfig;
use crate::raster::Image;

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleConfig {
    /// Number of size hypotheses (odd, so the pyramid is symmetric).
    pub num_scales: usize,
    /// Size ratio between adjacent hypotheses (> 1).
    pub scale_step: f64,
    /// Ridge term of the 1-D filter.
    pub lambda: f64,
    /// Regression target width as a fraction of sqrt(S).
    pub sigma_factor: f64,
    /// Pixel-area cap for the internal template all crops resize to.
    pub model_max_area: f64,
    /// Cell edge of the gradient features on the template.
    pub cell_size: usize,
}

impl Default for ScaleConfig {
    fn default() -> Self {
        ScaleConfig {
            num_scales: 33,
            scale_step: 1.02,
            lambda: 0.01,
            sigma_factor: 0.25,
            model_max_area: 512.0,
            cell_size: 4,
        }
    }
}

impl ScaleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_scales == 0 || self.num_scales.is_multiple_of(2) {
            return Err(Error::invalid_config("num_scales must be odd"));
        }
        if !self.scale_step.is_finite() || self.scale_step <= 1.0 {
            return Err(Error::invalid_config("scale_step must be > 1"));
        }
        if !self.lambda.is_finite() || self.lambda <= 0.0 {
            return Err(Error::invalid_config("lambda must be positive"));
        }
        if !self.sigma_factor.is_finite() || self.sigma_factor <= 0.0 {
            return Err(Error::invalid_config("sigma_factor must be positive"));
        }
        if !self.model_max_area.is_finite() || self.model_max_area < 16.0 {
            return Err(Error::invalid_config("model_max_area too small"));
        }
        if self.cell_size == 0 {
            return Err(Error::invalid_config("cell_size must be positive"));
        }
        Ok(())
    }
}

/// Outcome of a size query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleEstimate {
    /// Relative size change, a^{k*}.
    pub multiplier: f64,
    /// Set when the box is too small to measure or the response was unusable.
    pub low_confidence: bool,
}

#[derive(Debug, Clone)]
pub struct ScaleFilterState {
    cfg: ScaleConfig,
    /// Template (width, height) in pixels every hypothesis resizes to.
    model_size: (usize, usize),
    /// Taper over the hypothesis axis.
    window: Vec<f64>,
    /// Spectrum of the regression target (peak at the centre hypothesis).
    label_fft: Vec<Complex64>,
    /// Learned numerator spectra, one row per feature dimension.
    num: Array2<Complex64>,
    /// Learned power spectrum summed over feature dimensions.
    den: Vec<f64>,
    /// Cumulative size multiplier relative to the initial box.
    current_scale: f64,
    /// Clamp range keeping the box measurable and inside the frame.
    bounds: (f64, f64),
    trained: bool,
}

impl ScaleFilterState {
    /// `frame_dims` is (height, width); `base_size` is the initial box
    /// (width, height) the cumulative multiplier is relative to.
    pub fn new(
        cfg: ScaleConfig,
        frame_dims: (usize, usize),
        base_size: (f64, f64),
    ) -> Result<ScaleFilterState> {
        cfg.validate()?;
        if !(base_size.0.is_finite() && base_size.1.is_finite())
            || base_size.0 <= 0.0
            || base_size.1 <= 0.0
        {
            return Err(Error::invalid_input("base size must be positive"));
        }
        let s = cfg.num_scales;
        let window = hann(s).to_vec();
        let mid = (s - 1) / 2;
        let sigma = cfg.sigma_factor * (s as f64).sqrt();
        let label: Vec<f64> = (0..s)
            .map(|j| {
                let d = j as f64 - mid as f64;
                (-0.5 * d * d / (sigma * sigma)).exp()
            })
            .collect();
        let label_fft = fft1_real(&label);

        // Shrink the box to the area cap, then snap to whole feature cells.
        let shrink = (cfg.model_max_area / (base_size.0 * base_size.1))
            .sqrt()
            .min(1.0);
        let cell = cfg.cell_size as f64;
        let snap = |v: f64| ((v * shrink / cell).round().max(1.0) as usize) * cfg.cell_size;
        let model_size = (snap(base_size.0), snap(base_size.1));
        let grid = (model_size.1 / cfg.cell_size, model_size.0 / cfg.cell_size);
        let dim = grid.0 * grid.1 * HOG_CHANNELS;

        let (fh, fw) = frame_dims;
        let min_s = (4.0 / base_size.0).max(4.0 / base_size.1).min(1.0);
        let max_s = (fw as f64 / base_size.0)
            .min(fh as f64 / base_size.1)
            .max(1.0);
        Ok(ScaleFilterState {
            cfg,
            model_size,
            window,
            label_fft,
            num: Array2::zeros((dim, s)),
            den: vec![0.0; s],
            current_scale: 1.0,
            bounds: (min_s.min(max_s), max_s),
            trained: false,
        })
    }

    pub fn config(&self) -> &ScaleConfig {
        &self.cfg
    }

    pub fn model_size(&self) -> (usize, usize) {
        self.model_size
    }

    /// Cumulative multiplier relative to the initial box.
    pub fn scale(&self) -> f64 {
        self.current_scale
    }

    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }

    /// Folds a relative multiplier into the cumulative scale, clamped to the
    /// representable range. Returns the clamped cumulative value.
    pub fn apply_multiplier(&mut self, multiplier: f64) -> f64 {
        let m = if multiplier.is_finite() { multiplier } else { 1.0 };
        self.current_scale = (self.current_scale * m).clamp(self.bounds.0, self.bounds.1);
        self.current_scale
    }

    /// Crop for the hypothesis `k` steps from `size`, resized to the template.
    /// k = 0 is exactly the box-sized crop used by the translation stage.
    pub fn hypothesis_patch(
        &self,
        frame: &Image,
        center: (f64, f64),
        size: (f64, f64),
        k: i32,
    ) -> Image {
        let f = self.cfg.scale_step.powi(k);
        crop_patch(frame, center, (size.0 * f, size.1 * f), 1.0, self.model_size)
    }

    /// Feature matrix: one tapered gradient-feature column per hypothesis.
    fn feature_matrix(
        &self,
        frame: &Image,
        center: (f64, f64),
        size: (f64, f64),
        enhance_cfg: Option<&IlluminanceConfig>,
    ) -> Result<Array2<f64>> {
        let s = self.cfg.num_scales;
        let mid = (s as i32 - 1) / 2;
        let dim = self.num.dim().0;
        let cols: Vec<Vec<f64>> = (0..s)
            .into_par_iter()
            .map(|j| -> Result<Vec<f64>> {
                let patch = self.hypothesis_patch(frame, center, size, j as i32 - mid);
                let patch = match enhance_cfg {
                    Some(cfg) => enhance_patch(&patch, cfg)?,
                    None => patch,
                };
                let hog = extract_fhog(&patch, self.cfg.cell_size);
                debug_assert_eq!(hog.len(), dim);
                let w = self.window[j];
                Ok(hog.iter().map(|&v| v * w).collect())
            })
            .collect::<Result<_>>()?;
        let mut f = Array2::zeros((dim, s));
        for (j, col) in cols.iter().enumerate() {
            for (d, &v) in col.iter().enumerate() {
                f[[d, j]] = v;
            }
        }
        Ok(f)
    }

    /// Scores all hypotheses around `size` and returns the best relative
    /// size change. `size` is the current box in pixels.
    pub fn detect(
        &self,
        frame: &Image,
        center: (f64, f64),
        size: (f64, f64),
        enhance_cfg: Option<&IlluminanceConfig>,
    ) -> Result<ScaleEstimate> {
        if !self.trained {
            return Err(Error::invalid_input(
                "scale filter queried before first update",
            ));
        }
        if size.0 <= 2.0 || size.1 <= 2.0 {
            return Ok(ScaleEstimate {
                multiplier: 1.0,
                low_confidence: true,
            });
        }
        let s = self.cfg.num_scales;
        if s == 1 {
            return Ok(ScaleEstimate {
                multiplier: 1.0,
                low_confidence: false,
            });
        }
        let f = self.feature_matrix(frame, center, size, enhance_cfg)?;
        let dim = f.dim().0;
        let mut resp_hat = vec![Complex64::new(0.0, 0.0); s];
        for d in 0..dim {
            let row = f.row(d);
            let z_hat = fft1_real(row.as_slice().expect("standard layout"));
            for j in 0..s {
                resp_hat[j] += self.num[[d, j]] * z_hat[j];
            }
        }
        for (r, &den) in resp_hat.iter_mut().zip(&self.den) {
            *r /= den + self.cfg.lambda;
        }
        let resp = ifft1_real(&resp_hat);

        let mut best = 0usize;
        let mut best_v = f64::NEG_INFINITY;
        for (j, &v) in resp.iter().enumerate() {
            if v > best_v {
                best_v = v;
                best = j;
            }
        }
        if !best_v.is_finite() {
            return Ok(ScaleEstimate {
                multiplier: 1.0,
                low_confidence: true,
            });
        }
        let mid = (s as i32 - 1) / 2;
        Ok(ScaleEstimate {
            multiplier: self.cfg.scale_step.powi(best as i32 - mid),
            low_confidence: false,
        })
    }

    /// Re-measures the pyramid at `size` and folds the new numerator and
    /// denominator into the accumulators with rate `eta_s` (the first call
    /// adopts them outright).
    pub fn update(
        &mut self,
        frame: &Image,
        center: (f64, f64),
        size: (f64, f64),
        eta_s: f64,
        enhance_cfg: Option<&IlluminanceConfig>,
    ) -> Result<()> {
        if !(0.0..=1.0).contains(&eta_s) {
            return Err(Error::invalid_input("eta_s must lie in [0, 1]"));
        }
        if !(size.0.is_finite() && size.1.is_finite()) || size.0 <= 0.0 || size.1 <= 0.0 {
            return Err(Error::invalid_input("size must be positive"));
        }
        let s = self.cfg.num_scales;
        let f = self.feature_matrix(frame, center, size, enhance_cfg)?;
        let dim = f.dim().0;
        let mut new_num = Array2::zeros((dim, s));
        let mut new_den = vec![0.0; s];
        for d in 0..dim {
            let row = f.row(d);
            let x_hat = fft1_real(row.as_slice().expect("standard layout"));
            for j in 0..s {
                new_num[[d, j]] = self.label_fft[j] * x_hat[j].conj();
                new_den[j] += x_hat[j].norm_sqr();
            }
        }
        if !self.trained {
            self.num = new_num;
            self.den = new_den;
            self.trained = true;
        } else {
            let keep = 1.0 - eta_s;
            ndarray::Zip::from(&mut self.num)
                .and(&new_num)
                .for_each(|o, &n| *o = *o * keep + n * eta_s);
            for (o, &n) in self.den.iter_mut().zip(&new_den) {
                *o = *o * keep + n * eta_s;
            }
        }
        Ok(())
    }
}
