//! Dual correlation filters trained by ADMM.
//!
//! Two filters are learned on the same grid: a context filter over the
//! full search-region features and a target-focused filter over masked
//! features. Both are constrained to a small centered support window
//! (background-aware cropping) and tied together by a mutual penalty
//! `mu/2 * ||w_g - w_o||^2`, so each filter regularizes the other. The
//! joint objective is minimized by block alternation; each block runs a
//! few ADMM sweeps with a frequency-domain data term solved per bin via a
//! rank-1 (Sherman-Morrison) update.
//!
//! Conventions used throughout this module:
//! - forward DFTs are unnormalized, inverses carry the `1/T` factor;
//! - the detection operator is circular cross-correlation, realized as
//!   `conj(w_hat) * z_hat` per channel;
//! - spatial filters are real; their spectra are kept per channel.

pub mod baseline;

use ndarray::{Array2, Array3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft2::{fft2_real, ifft2_real};
use crate::features::FeatureMap;
use crate::mask::GridRect;

/// Regression target: circular Gaussian peaked at the zero-shift bin.
#[derive(Debug, Clone)]
pub struct GaussianLabel {
    pub values: Array2<f64>,
    pub dft: Array2<Complex64>,
    pub sigma_label: f64,
}

/// Builds the label for a `grid` = (rows, cols) response plane. The
/// spread scales with the square root of the target area in cells.
pub fn gaussian_label(
    grid: (usize, usize),
    sigma_factor: f64,
    target_cells: (usize, usize),
) -> GaussianLabel {
    assert!(grid.0 >= 1 && grid.1 >= 1, "label grid must be nonempty");
    assert!(sigma_factor > 0.0, "sigma factor must be positive");
    assert!(target_cells.0 >= 1 && target_cells.1 >= 1);
    let sigma = sigma_factor * ((target_cells.0 * target_cells.1) as f64).sqrt();
    let (h, w) = grid;
    let values = Array2::from_shape_fn((h, w), |(y, x)| {
        // Wrap-around distance to the (0,0) bin.
        let dy = y.min(h - y) as f64;
        let dx = x.min(w - x) as f64;
        (-(dy * dy + dx * dx) / (2.0 * sigma * sigma)).exp()
    });
    let dft = fft2_real(&values);
    GaussianLabel {
        values,
        dft,
        sigma_label: sigma,
    }
}

/// Solver hyperparameters; day and night presets differ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    /// Ridge weight on each filter.
    pub lambda: f64,
    /// Mutual-constraint weight tying the two filters.
    pub mu: f64,
    /// Weight of the target-focused response in the fused detection.
    pub psi: f64,
    /// Appearance-model learning rate.
    pub eta_t: f64,
    /// Scale-model learning rate.
    pub eta_s: f64,
}

impl TrainConfig {
    pub fn day() -> Self {
        TrainConfig {
            lambda: 0.01,
            mu: 280.0,
            psi: 0.02,
            eta_t: 0.032,
            eta_s: 0.016,
        }
    }

    pub fn night() -> Self {
        TrainConfig {
            lambda: 0.01,
            mu: 200.0,
            psi: 0.01,
            eta_t: 0.024,
            eta_s: 0.023,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda < 0.0 || self.mu < 0.0 || self.psi < 0.0 {
            return Err(Error::invalid_config(
                "lambda, mu, psi must be non-negative",
            ));
        }
        for (name, eta) in [("eta_t", self.eta_t), ("eta_s", self.eta_s)] {
            if !(eta > 0.0 && eta < 1.0) {
                return Err(Error::invalid_config(format!("{name} must lie in (0,1)")));
            }
        }
        Ok(())
    }
}

/// ADMM iteration schedule. The defaults favor speed (tracking); tests
/// use [`AdmmSchedule::thorough`] to actually converge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmSchedule {
    pub gamma0: f64,
    pub gamma_growth: f64,
    pub gamma_max: f64,
    /// ADMM sweeps per filter block.
    pub inner_iters: usize,
    /// Alternation passes over the two blocks.
    pub outer_passes: usize,
}

impl Default for AdmmSchedule {
    fn default() -> Self {
        AdmmSchedule {
            gamma0: 1.0,
            gamma_growth: 10.0,
            gamma_max: 1e4,
            inner_iters: 2,
            outer_passes: 2,
        }
    }
}

impl AdmmSchedule {
    /// Slow-growth, many-sweep schedule for solver-accuracy checks.
    pub fn thorough() -> Self {
        AdmmSchedule {
            gamma0: 1.0,
            gamma_growth: 1.3,
            gamma_max: 1e3,
            inner_iters: 50,
            outer_passes: 40,
        }
    }
}

/// Per-block ADMM variables, kept in the frequency domain.
#[derive(Debug, Clone)]
pub struct AdmmState {
    /// Unconstrained filter copy, one spectrum per channel.
    pub v: Vec<Array2<Complex64>>,
    /// Scaled multipliers, one spectrum per channel.
    pub theta: Vec<Array2<Complex64>>,
    pub gamma: f64,
    pub iters: usize,
}

impl AdmmState {
    pub fn fresh(grid: (usize, usize), channels: usize, gamma0: f64) -> Self {
        AdmmState {
            v: vec![Array2::zeros(grid); channels],
            theta: vec![Array2::zeros(grid); channels],
            gamma: gamma0,
            iters: 0,
        }
    }
}

/// The trained pair of filters plus their spectra and support window.
#[derive(Debug, Clone)]
pub struct DualFilter {
    /// Context filter, full grid, zero outside `support`.
    pub w_g: Array3<f64>,
    /// Target-focused filter, same layout.
    pub w_o: Array3<f64>,
    pub w_g_hat: Vec<Array2<Complex64>>,
    pub w_o_hat: Vec<Array2<Complex64>>,
    pub support: GridRect,
}

/// Convergence summary for one training call.
#[derive(Debug, Clone)]
pub struct SolverReport {
    /// Joint objective at the returned iterate.
    pub objective: f64,
    pub outer_passes_run: usize,
    /// Set when the objective rose three consecutive passes; the best
    /// iterate seen is returned in that case.
    pub warning: Option<String>,
}

/// Accumulated training samples for the two feature streams.
#[derive(Debug, Clone)]
pub struct AppearanceModel {
    pub x_g: FeatureMap,
    pub x_o: FeatureMap,
}

impl AppearanceModel {
    pub fn init(x_g: FeatureMap, x_o: FeatureMap) -> Self {
        AppearanceModel { x_g, x_o }
    }

    /// Convex interpolation toward the newest samples.
    pub fn update(&mut self, x_g: &FeatureMap, x_o: &FeatureMap, eta: f64) {
        self.x_g.blend(x_g, eta);
        self.x_o.blend(x_o, eta);
    }
}

/// Fused correlation response plane.
#[derive(Debug, Clone)]
pub struct ResponseMap {
    pub values: Array2<f64>,
    /// Largest imaginary component discarded by the inverse transform;
    /// stays near machine precision for consistent inputs.
    pub imag_residual: f64,
}

/// Peak estimate in cell units, signed with wrap-aware convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub dy: f64,
    pub dx: f64,
    pub value: f64,
    pub low_confidence: bool,
}

/// Forward DFT of every channel of a feature map.
pub fn channel_ffts(map: &FeatureMap) -> Vec<Array2<Complex64>> {
    let (_, _, d) = map.data.dim();
    (0..d)
        .map(|c| fft2_real(&map.data.slice(ndarray::s![.., .., c]).to_owned()))
        .collect()
}

fn check_finite(map: &FeatureMap, name: &str) -> Result<()> {
    if map.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid_input(format!(
            "non-finite values in {name} features"
        )));
    }
    Ok(())
}

/// Support-constrained ridge step: combines the sibling filter, the
/// multipliers, and the unconstrained copy (both mapped to the spatial
/// domain) into the new filter, which is zero outside the support.
pub fn solve_w_subproblem(
    w_other: &Array3<f64>,
    theta: &[Array2<Complex64>],
    v: &[Array2<Complex64>],
    cfg: &TrainConfig,
    gamma: f64,
    t: usize,
    support: GridRect,
) -> Result<Array3<f64>> {
    let denom = cfg.lambda + cfg.mu + gamma * t as f64;
    if denom == 0.0 {
        return Err(Error::invalid_config(
            "lambda + mu + gamma*T must be positive",
        ));
    }
    let (h, w, d) = w_other.dim();
    let mut out = Array3::zeros((h, w, d));
    let tf = t as f64;
    for c in 0..d {
        // Skip the inverse transforms entirely when the spectra are zero
        // (first sweep from a fresh state).
        let theta_sp = if theta[c].iter().any(|z| z.norm_sqr() != 0.0) {
            Some(ifft2_real(&theta[c]))
        } else {
            None
        };
        let v_sp = if v[c].iter().any(|z| z.norm_sqr() != 0.0) {
            Some(ifft2_real(&v[c]))
        } else {
            None
        };
        for y in support.y0..support.y0 + support.h {
            for x in support.x0..support.x0 + support.w {
                let th = theta_sp.as_ref().map_or(0.0, |m| m[[y, x]]);
                let vv = v_sp.as_ref().map_or(0.0, |m| m[[y, x]]);
                out[[y, x, c]] =
                    (cfg.mu * w_other[[y, x, c]] + tf * th + gamma * tf * vv) / denom;
            }
        }
    }
    Ok(out)
}

/// Per-bin data-term solve via the rank-1 update: for each frequency bin
/// the D x D system `(x x^H + gamma*T*I) v = conj(y)*x - T*theta +
/// gamma*T*w` is solved in closed form without forming the matrix.
pub fn solve_v_subproblem(
    x_hat: &[Array2<Complex64>],
    y_hat: &Array2<Complex64>,
    w_hat: &[Array2<Complex64>],
    theta: &[Array2<Complex64>],
    gamma: f64,
    t: usize,
) -> Vec<Array2<Complex64>> {
    let d = x_hat.len();
    let grid = y_hat.dim();
    let tf = t as f64;
    let gt = gamma * tf;
    assert!(gt > 0.0, "penalty gamma*T must be positive");
    let mut out = vec![Array2::<Complex64>::zeros(grid); d];
    for yy in 0..grid.0 {
        for xx in 0..grid.1 {
            let idx = [yy, xx];
            let yv = y_hat[idx].conj();
            // rhs and the two inner products for the rank-1 correction.
            let mut sx = 0.0;
            let mut xh_rhs = Complex64::default();
            let mut rhs = [Complex64::default(); 64];
            debug_assert!(d <= 64, "channel count exceeds the stack buffer");
            for c in 0..d {
                let xv = x_hat[c][idx];
                let r = yv * xv - tf * theta[c][idx] + gt * w_hat[c][idx];
                rhs[c] = r;
                sx += xv.norm_sqr();
                xh_rhs += xv.conj() * r;
            }
            let b = sx + gt;
            let corr = xh_rhs / (gt * b);
            for c in 0..d {
                out[c][idx] = rhs[c] / gt - x_hat[c][idx] * corr;
            }
        }
    }
    out
}

/// Multiplier ascent: `theta += gamma * (v - w_hat)` per channel.
pub fn update_lagrangian(
    theta: &mut [Array2<Complex64>],
    v: &[Array2<Complex64>],
    w_hat: &[Array2<Complex64>],
    gamma: f64,
) {
    for c in 0..theta.len() {
        ndarray::Zip::from(&mut theta[c])
            .and(&v[c])
            .and(&w_hat[c])
            .for_each(|t, &vv, &ww| *t += gamma * (vv - ww));
    }
}

/// Correlation response of one filter bank against one sample's spectra.
fn correlate(w_hat: &[Array2<Complex64>], z_hat: &[Array2<Complex64>]) -> Array2<Complex64> {
    let grid = w_hat[0].dim();
    let mut acc = Array2::<Complex64>::zeros(grid);
    for c in 0..w_hat.len() {
        ndarray::Zip::from(&mut acc)
            .and(&w_hat[c])
            .and(&z_hat[c])
            .for_each(|a, &w, &z| *a += w.conj() * z);
    }
    acc
}

/// Joint objective: two data terms, two ridge terms, and the mutual
/// penalty. Used for divergence monitoring and solver tests.
///
/// The argument list mirrors the terms of the energy; bundling them
/// into a struct would only obscure which quantity feeds which term.
#[allow(clippy::too_many_arguments)]
pub fn dual_objective(
    w_g: &Array3<f64>,
    w_o: &Array3<f64>,
    w_g_hat: &[Array2<Complex64>],
    w_o_hat: &[Array2<Complex64>],
    x_g_hat: &[Array2<Complex64>],
    x_o_hat: &[Array2<Complex64>],
    label: &GaussianLabel,
    cfg: &TrainConfig,
) -> f64 {
    let t = label.values.len() as f64;
    let data = |w_hat: &[Array2<Complex64>], x_hat: &[Array2<Complex64>]| -> f64 {
        let resp = correlate(w_hat, x_hat);
        // Parseval: spatial residual energy = spectral energy / T.
        ndarray::Zip::from(&label.dft)
            .and(&resp)
            .fold(0.0, |acc, &y, &r| acc + (y - r).norm_sqr())
            / t
    };
    let norm2 = |w: &Array3<f64>| w.iter().map(|v| v * v).sum::<f64>();
    let diff2 = w_g
        .iter()
        .zip(w_o.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>();
    0.5 * data(w_g_hat, x_g_hat)
        + 0.5 * data(w_o_hat, x_o_hat)
        + 0.5 * cfg.lambda * (norm2(w_g) + norm2(w_o))
        + 0.5 * cfg.mu * diff2
}

/// Augmented Lagrangian of one filter block (used by solver tests to
/// check that the two minimization steps never increase it).
///
/// Like [`dual_objective`], the arguments map one-to-one onto the terms.
#[allow(clippy::too_many_arguments)]
pub fn block_augmented_lagrangian(
    w: &Array3<f64>,
    w_hat: &[Array2<Complex64>],
    w_other: &Array3<f64>,
    v: &[Array2<Complex64>],
    theta: &[Array2<Complex64>],
    x_hat: &[Array2<Complex64>],
    label: &GaussianLabel,
    cfg: &TrainConfig,
    gamma: f64,
) -> f64 {
    let t = label.values.len() as f64;
    let resp = correlate(v, x_hat);
    let data = ndarray::Zip::from(&label.dft)
        .and(&resp)
        .fold(0.0, |acc, &y, &r| acc + (y - r).norm_sqr())
        / t;
    let norm2 = |w: &Array3<f64>| w.iter().map(|v| v * v).sum::<f64>();
    let diff2 = w
        .iter()
        .zip(w_other.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>();
    let mut lagr = 0.0;
    let mut penalty = 0.0;
    for c in 0..v.len() {
        ndarray::Zip::from(&v[c])
            .and(&w_hat[c])
            .and(&theta[c])
            .for_each(|&vv, &ww, &th| {
                let r = vv - ww;
                lagr += (th.conj() * r).re;
                penalty += r.norm_sqr();
            });
    }
    // The multiplier/penalty terms are frequency-domain sums; via
    // Parseval they equal T times the corresponding spatial sums, which
    // is exactly the scaling the subproblem solutions minimize.
    0.5 * data + 0.5 * cfg.lambda * norm2(w) + 0.5 * cfg.mu * diff2 + lagr + 0.5 * gamma * penalty
}

/// Spectra of every channel of a spatial filter.
fn filter_ffts(w: &Array3<f64>) -> Vec<Array2<Complex64>> {
    let (_, _, d) = w.dim();
    (0..d)
        .map(|c| fft2_real(&w.slice(ndarray::s![.., .., c]).to_owned()))
        .collect()
}

/// Runs the ADMM sweeps for one filter block (data term `x_hat`, sibling
/// `w_other`) and returns the block's new filter with its spectra.
#[allow(clippy::too_many_arguments)]
fn run_block(
    x_hat: &[Array2<Complex64>],
    w_other: &Array3<f64>,
    label: &GaussianLabel,
    cfg: &TrainConfig,
    schedule: &AdmmSchedule,
    support: GridRect,
    t: usize,
) -> Result<(Array3<f64>, Vec<Array2<Complex64>>)> {
    let grid = label.values.dim();
    let d = x_hat.len();
    let mut state = AdmmState::fresh(grid, d, schedule.gamma0);
    let mut w = Array3::zeros(w_other.dim());
    let mut w_hat = vec![Array2::zeros(grid); d];
    for _ in 0..schedule.inner_iters {
        w = solve_w_subproblem(w_other, &state.theta, &state.v, cfg, state.gamma, t, support)?;
        w_hat = filter_ffts(&w);
        state.v = solve_v_subproblem(x_hat, &label.dft, &w_hat, &state.theta, state.gamma, t);
        update_lagrangian(&mut state.theta, &state.v, &w_hat, state.gamma);
        state.gamma = (state.gamma * schedule.gamma_growth).min(schedule.gamma_max);
        state.iters += 1;
    }
    Ok((w, w_hat))
}

/// Best iterate kept across alternation passes: objective value, both
/// filters, and their spectra.
type BestIterate = (
    f64,
    Array3<f64>,
    Array3<f64>,
    Vec<Array2<Complex64>>,
    Vec<Array2<Complex64>>,
);

/// Trains the filter pair by block alternation over the mutual objective.
pub fn train_dual_filters(
    x_g: &FeatureMap,
    x_o: &FeatureMap,
    label: &GaussianLabel,
    cfg: &TrainConfig,
    schedule: &AdmmSchedule,
    support: GridRect,
) -> Result<(DualFilter, SolverReport)> {
    cfg.validate()?;
    check_finite(x_g, "context")?;
    check_finite(x_o, "target-focused")?;
    let (h, w, d) = x_g.data.dim();
    if x_o.data.dim() != (h, w, d) {
        return Err(Error::invalid_input("feature streams differ in shape"));
    }
    if label.values.dim() != (h, w) {
        return Err(Error::invalid_input("label grid does not match features"));
    }
    if support.y0 + support.h > h || support.x0 + support.w > w || support.area() == 0 {
        return Err(Error::invalid_input("filter support outside feature grid"));
    }
    let t = h * w;

    let x_g_hat = channel_ffts(x_g);
    let x_o_hat = channel_ffts(x_o);

    let mut w_g = Array3::zeros((h, w, d));
    let mut w_o = Array3::zeros((h, w, d));
    let mut w_g_hat = vec![Array2::zeros((h, w)); d];
    let mut w_o_hat = vec![Array2::zeros((h, w)); d];

    let mut best: Option<BestIterate> = None;
    let mut prev_objective = f64::INFINITY;
    let mut rises = 0usize;
    let mut warning = None;
    let mut passes_run = 0usize;

    for _ in 0..schedule.outer_passes {
        let (ng, ng_hat) = run_block(&x_g_hat, &w_o, label, cfg, schedule, support, t)?;
        w_g = ng;
        w_g_hat = ng_hat;
        let (no, no_hat) = run_block(&x_o_hat, &w_g, label, cfg, schedule, support, t)?;
        w_o = no;
        w_o_hat = no_hat;
        passes_run += 1;

        let obj = dual_objective(
            &w_g, &w_o, &w_g_hat, &w_o_hat, &x_g_hat, &x_o_hat, label, cfg,
        );
        if best.as_ref().is_none_or(|(b, ..)| obj < *b) {
            best = Some((obj, w_g.clone(), w_o.clone(), w_g_hat.clone(), w_o_hat.clone()));
        }
        if obj > prev_objective {
            rises += 1;
            if rises >= 3 {
                warning = Some(format!(
                    "solver objective rose {rises} consecutive passes; keeping best iterate"
                ));
                break;
            }
        } else {
            rises = 0;
        }
        prev_objective = obj;
    }

    let (objective, w_g, w_o, w_g_hat, w_o_hat) = if warning.is_some() {
        best.expect("at least one pass ran")
    } else {
        let obj = dual_objective(
            &w_g, &w_o, &w_g_hat, &w_o_hat, &x_g_hat, &x_o_hat, label, cfg,
        );
        (obj, w_g, w_o, w_g_hat, w_o_hat)
    };

    Ok((
        DualFilter {
            w_g,
            w_o,
            w_g_hat,
            w_o_hat,
            support,
        },
        SolverReport {
            objective,
            outer_passes_run: passes_run,
            warning,
        },
    ))
}

/// Fused detection response: context correlation plus `psi` times the
/// target-focused correlation.
pub fn detect(filter: &DualFilter, z_g: &FeatureMap, z_o: &FeatureMap, psi: f64) -> Result<ResponseMap> {
    let d = filter.w_g_hat.len();
    if z_g.data.dim().2 != d || z_o.data.dim().2 != d {
        return Err(Error::invalid_input("detection sample channel mismatch"));
    }
    let grid = filter.w_g_hat[0].dim();
    if z_g.grid() != grid || z_o.grid() != grid {
        return Err(Error::invalid_input("detection sample grid mismatch"));
    }
    let z_g_hat = channel_ffts(z_g);
    let z_o_hat = channel_ffts(z_o);
    let mut spectrum = correlate(&filter.w_g_hat, &z_g_hat);
    if psi != 0.0 {
        let focused = correlate(&filter.w_o_hat, &z_o_hat);
        ndarray::Zip::from(&mut spectrum)
            .and(&focused)
            .for_each(|a, &b| *a += psi * b);
    }
    let full = crate::fft2::ifft2(&spectrum);
    let imag_residual = full.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(ResponseMap {
        values: full.mapv(|z| z.re),
        imag_residual,
    })
}

/// Signed wrap-aware shift for a response-plane index.
#[inline]
fn wrap_signed(i: usize, n: usize) -> f64 {
    if (i as f64) > n as f64 / 2.0 {
        i as f64 - n as f64
    } else {
        i as f64
    }
}

/// Finds the response peak. The integer argmax (first maximum in
/// row-major order) is optionally refined by a quadratic fit over its
/// wrap-around 3x3 neighborhood; the refinement is clamped to half a
/// cell. A flat response yields (0,0) with the low-confidence flag.
pub fn locate_peak(resp: &ResponseMap, refine: bool) -> Peak {
    let (h, w) = resp.values.dim();
    assert!(h > 0 && w > 0, "empty response");
    let mut iy = 0usize;
    let mut ix = 0usize;
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    for ((y, x), &v) in resp.values.indexed_iter() {
        if v > max {
            max = v;
            iy = y;
            ix = x;
        }
        if v < min {
            min = v;
        }
    }
    if max - min == 0.0 {
        return Peak {
            dy: 0.0,
            dx: 0.0,
            value: max,
            low_confidence: true,
        };
    }

    let mut dy = wrap_signed(iy, h);
    let mut dx = wrap_signed(ix, w);

    if refine && h >= 3 && w >= 3 {
        // Least-squares quadratic over the 3x3 wrap neighborhood:
        // f ~ c0 + c1 u + c2 v + c3 u^2 + c4 v^2 + c5 uv.
        let mut s = 0.0;
        let mut su = 0.0;
        let mut sv = 0.0;
        let mut suu = 0.0;
        let mut svv = 0.0;
        let mut suv = 0.0;
        for du in -1i64..=1 {
            for dv in -1i64..=1 {
                let y = (iy as i64 + du).rem_euclid(h as i64) as usize;
                let x = (ix as i64 + dv).rem_euclid(w as i64) as usize;
                let f = resp.values[[y, x]];
                let (uf, vf) = (du as f64, dv as f64);
                s += f;
                su += uf * f;
                sv += vf * f;
                suu += uf * uf * f;
                svv += vf * vf * f;
                suv += uf * vf * f;
            }
        }
        let c1 = su / 6.0;
        let c2 = sv / 6.0;
        let c5 = suv / 4.0;
        let sum34 = (suu + svv - 4.0 * s / 3.0) / 2.0;
        let d34 = (suu - svv) / 2.0;
        let c3 = (sum34 + d34) / 2.0;
        let c4 = (sum34 - d34) / 2.0;
        let det = 4.0 * c3 * c4 - c5 * c5;
        // Refine only toward a proper local maximum.
        if det > 0.0 && c3 < 0.0 {
            let ry = -(2.0 * c4 * c1 - c5 * c2) / det;
            let rx = -(2.0 * c3 * c2 - c5 * c1) / det;
            dy += ry.clamp(-0.5, 0.5);
            dx += rx.clamp(-0.5, 0.5);
        }
    }

    Peak {
        dy,
        dx,
        value: max,
        low_confidence: false,
    }
}
