//! Single-filter background-aware correlation filter.
//!
//! This is a deliberately self-contained reference path: one filter, no
//! mutual coupling, trained by its own ADMM loop written independently of
//! the dual solver. The tracker can run on it as an alternative backend,
//! and the test suite uses it to cross-check that the dual solver with
//! the coupling weight at zero collapses to exactly this behavior.

use ndarray::{Array2, Array3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft2::{fft2_real, ifft2, ifft2_real};
use crate::features::FeatureMap;
use crate::mask::GridRect;

use super::{AdmmSchedule, GaussianLabel};

/// A trained single filter with per-channel spectra.
#[derive(Debug, Clone)]
pub struct BaselineFilter {
    pub w: Array3<f64>,
    pub w_hat: Vec<Array2<Complex64>>,
    pub support: GridRect,
}

/// Trains the support-constrained single filter by ADMM: ridge step on
/// the support, per-bin frequency solve of the data term, multiplier
/// ascent, growing penalty.
pub fn train_baseline(
    x: &FeatureMap,
    label: &GaussianLabel,
    lambda: f64,
    schedule: &AdmmSchedule,
    support: GridRect,
) -> Result<BaselineFilter> {
    if x.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid_input("non-finite feature values"));
    }
    let (h, w, d) = x.data.dim();
    if label.values.dim() != (h, w) {
        return Err(Error::invalid_input("label grid does not match features"));
    }
    if support.y0 + support.h > h || support.x0 + support.w > w || support.area() == 0 {
        return Err(Error::invalid_input("filter support outside feature grid"));
    }
    let t = (h * w) as f64;

    let x_hat: Vec<Array2<Complex64>> = (0..d)
        .map(|c| fft2_real(&x.data.slice(ndarray::s![.., .., c]).to_owned()))
        .collect();

    let mut filt = Array3::<f64>::zeros((h, w, d));
    let mut filt_hat: Vec<Array2<Complex64>> = vec![Array2::zeros((h, w)); d];
    let mut v: Vec<Array2<Complex64>> = vec![Array2::zeros((h, w)); d];
    let mut th: Vec<Array2<Complex64>> = vec![Array2::zeros((h, w)); d];
    let mut gamma = schedule.gamma0;

    for sweep in 0..schedule.inner_iters {
        // Ridge step on the support window.
        let gt = gamma * t;
        let denom = lambda + gt;
        for c in 0..d {
            if sweep == 0 {
                // v and the multipliers are still zero: the filter stays
                // zero, skip the transforms.
                for y in support.y0..support.y0 + support.h {
                    for xx in support.x0..support.x0 + support.w {
                        filt[[y, xx, c]] = 0.0;
                    }
                }
                continue;
            }
            let th_sp = ifft2_real(&th[c]);
            let v_sp = ifft2_real(&v[c]);
            for y in 0..h {
                for xx in 0..w {
                    filt[[y, xx, c]] = if support.contains(y, xx) {
                        (t * th_sp[[y, xx]] + gt * v_sp[[y, xx]]) / denom
                    } else {
                        0.0
                    };
                }
            }
        }
        for (c, plane) in filt_hat.iter_mut().enumerate() {
            *plane = fft2_real(&filt.slice(ndarray::s![.., .., c]).to_owned());
        }

        // Frequency-domain data step: per bin, solve
        // (x x^H + gt I) v = conj(y) x - t*theta + gt*w via the rank-1
        // inverse (I - x x^H / (|x|^2 + gt)) / gt.
        for yy in 0..h {
            for xx in 0..w {
                let idx = [yy, xx];
                let yv = label.dft[idx].conj();
                let mut sx = 0.0;
                for xc in x_hat.iter() {
                    sx += xc[idx].norm_sqr();
                }
                let mut proj = Complex64::default();
                for c in 0..d {
                    let rhs = yv * x_hat[c][idx] - t * th[c][idx] + gt * filt_hat[c][idx];
                    proj += x_hat[c][idx].conj() * rhs;
                }
                let scale = proj / (gt * (sx + gt));
                for c in 0..d {
                    let rhs = yv * x_hat[c][idx] - t * th[c][idx] + gt * filt_hat[c][idx];
                    v[c][idx] = rhs / gt - x_hat[c][idx] * scale;
                }
            }
        }

        // Multiplier ascent on the split constraint.
        for c in 0..d {
            ndarray::Zip::from(&mut th[c])
                .and(&v[c])
                .and(&filt_hat[c])
                .for_each(|tv, &vv, &wv| *tv += gamma * (vv - wv));
        }
        gamma = (gamma * schedule.gamma_growth).min(schedule.gamma_max);
    }

    Ok(BaselineFilter {
        w: filt,
        w_hat: filt_hat,
        support,
    })
}

/// Correlation response of the single filter against a sample.
pub fn detect_baseline(filter: &BaselineFilter, z: &FeatureMap) -> Result<Array2<f64>> {
    let d = filter.w_hat.len();
    if z.data.dim().2 != d || z.grid() != filter.w_hat[0].dim() {
        return Err(Error::invalid_input("detection sample shape mismatch"));
    }
    let grid = filter.w_hat[0].dim();
    let mut acc = Array2::<Complex64>::zeros(grid);
    for c in 0..d {
        let z_hat = fft2_real(&z.data.slice(ndarray::s![.., .., c]).to_owned());
        ndarray::Zip::from(&mut acc)
            .and(&filter.w_hat[c])
            .and(&z_hat)
            .for_each(|a, &wv, &zv| *a += wv.conj() * zv);
    }
    Ok(ifft2(&acc).mapv(|z| z.re))
}
