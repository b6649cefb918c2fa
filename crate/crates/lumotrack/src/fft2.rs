//! Plan-cached 2-D FFT over `ndarray` arrays.
//!
//! Thin row/column wrapper around `rustfft`. The forward transform is
//! unnormalized; the inverse divides by the element count, so
//! `ifft2(fft2(x)) == x` up to rounding.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

thread_local! {
    static PLANS: RefCell<PlanCache> = RefCell::new(PlanCache::new());
}

struct PlanCache {
    planner: FftPlanner<f64>,
    plans: HashMap<(usize, bool), Arc<dyn Fft<f64>>>,
}

impl PlanCache {
    fn new() -> Self {
        PlanCache {
            planner: FftPlanner::new(),
            plans: HashMap::new(),
        }
    }

    fn plan(&mut self, len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
        self.plans
            .entry((len, inverse))
            .or_insert_with(|| {
                let dir = if inverse {
                    FftDirection::Inverse
                } else {
                    FftDirection::Forward
                };
                self.planner.plan_fft(len, dir)
            })
            .clone()
    }
}

fn transform_in_place(a: &mut Array2<Complex64>, inverse: bool) {
    let (h, w) = a.dim();
    PLANS.with(|cache| {
        let mut cache = cache.borrow_mut();
        let row_plan = cache.plan(w, inverse);
        let col_plan = cache.plan(h, inverse);
        let mut scratch =
            vec![Complex64::default(); row_plan.get_inplace_scratch_len().max(h.max(w))];

        for mut row in a.rows_mut() {
            let slice = row.as_slice_mut().expect("row-major layout");
            row_plan.process_with_scratch(slice, &mut scratch);
        }
        let col_scratch_len = col_plan.get_inplace_scratch_len().max(h);
        if scratch.len() < col_scratch_len + h {
            scratch.resize(col_scratch_len + h, Complex64::default());
        }
        let (col_buf, col_scratch) = scratch.split_at_mut(h);
        for x in 0..w {
            for y in 0..h {
                col_buf[y] = a[[y, x]];
            }
            col_plan.process_with_scratch(col_buf, col_scratch);
            for y in 0..h {
                a[[y, x]] = col_buf[y];
            }
        }
    });
}

/// Unnormalized forward 2-D DFT.
pub fn fft2(a: &Array2<Complex64>) -> Array2<Complex64> {
    let mut out = a.clone();
    fft2_in_place(&mut out);
    out
}

pub fn fft2_in_place(a: &mut Array2<Complex64>) {
    transform_in_place(a, false);
}

/// Inverse 2-D DFT normalized by `1 / (rows * cols)`.
pub fn ifft2(a: &Array2<Complex64>) -> Array2<Complex64> {
    let mut out = a.clone();
    ifft2_in_place(&mut out);
    out
}

pub fn ifft2_in_place(a: &mut Array2<Complex64>) {
    transform_in_place(a, true);
    let n = (a.dim().0 * a.dim().1) as f64;
    a.mapv_inplace(|v| v / n);
}

/// Forward DFT of a real field.
pub fn fft2_real(a: &Array2<f64>) -> Array2<Complex64> {
    let mut buf = a.mapv(|v| Complex64::new(v, 0.0));
    fft2_in_place(&mut buf);
    buf
}

/// Real part of the inverse DFT (for spectra of real fields).
pub fn ifft2_real(a: &Array2<Complex64>) -> Array2<f64> {
    ifft2(a).mapv(|v| v.re)
}

/// Unnormalized forward 1-D DFT in place.
pub fn fft1_in_place(a: &mut [Complex64]) {
    PLANS.with(|cache| {
        let mut cache = cache.borrow_mut();
        let plan = cache.plan(a.len(), false);
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(a, &mut scratch);
    });
}

/// Unnormalized forward 1-D DFT of a real sequence.
pub fn fft1_real(a: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = a.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft1_in_place(&mut buf);
    buf
}

/// Inverse 1-D DFT normalized by `1 / len`; returns the real part.
pub fn ifft1_real(a: &[Complex64]) -> Vec<f64> {
    let mut buf = a.to_vec();
    PLANS.with(|cache| {
        let mut cache = cache.borrow_mut();
        let plan = cache.plan(buf.len(), true);
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(&mut buf, &mut scratch);
    });
    let n = buf.len() as f64;
    buf.iter().map(|v| v.re / n).collect()
}
