//! Background-clutter suppression and quality metrics: mean subtraction,
//! SVD largest-singular-value removal, and the signal-to-clutter ratio.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{GprError, Result};
use crate::model::{Bscan, SurveyGrid};

/// Rectangular region of a B-scan holding the target reflection.
/// `t_hi` and `x_hi` are exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetWindow {
    pub t_lo: usize,
    pub t_hi: usize,
    pub x_lo: usize,
    pub x_hi: usize,
}

impl TargetWindow {
    pub fn new(t_lo: usize, t_hi: usize, x_lo: usize, x_hi: usize) -> Result<Self> {
        if t_lo >= t_hi || x_lo >= x_hi {
            return Err(GprError::Domain(format!(
                "empty window: t [{t_lo}, {t_hi}), x [{x_lo}, {x_hi})"
            )));
        }
        Ok(TargetWindow { t_lo, t_hi, x_lo, x_hi })
    }

    pub fn validate_for(&self, grid: &SurveyGrid) -> Result<()> {
        if self.t_hi > grid.n_samples || self.x_hi > grid.n_traces {
            return Err(GprError::Dimension(format!(
                "window t [{}, {}), x [{}, {}) exceeds the {}x{} grid",
                self.t_lo, self.t_hi, self.x_lo, self.x_hi, grid.n_samples, grid.n_traces
            )));
        }
        Ok(())
    }

    pub fn contains(&self, sample: usize, trace: usize) -> bool {
        sample >= self.t_lo && sample < self.t_hi && trace >= self.x_lo && trace < self.x_hi
    }
}

/// Subtract the average trace from every trace of `b`.
///
/// With a reference `background` scan the average trace is computed from
/// it (the target-free-site procedure); otherwise from `b` itself.
pub fn mean_subtract(b: &Bscan, background: Option<&Bscan>) -> Result<Bscan> {
    let source = match background {
        Some(bg) => {
            if bg.grid != b.grid {
                return Err(GprError::Dimension(
                    "background grid does not match the input grid".into(),
                ));
            }
            &bg.data
        }
        None => &b.data,
    };
    let n = source.ncols() as f64;
    let mean: DVector<f64> = source.column_sum() / n;
    let mut out = b.data.clone();
    for j in 0..out.ncols() {
        for i in 0..out.nrows() {
            out[(i, j)] -= mean[i];
        }
    }
    b.with_data(out)
}

/// Zero the `k` largest singular values of the scan and reconstruct.
pub fn svd_remove_largest(b: &Bscan, k: usize) -> Result<Bscan> {
    let max_rank = b.grid.n_samples.min(b.grid.n_traces);
    if k == 0 || k >= max_rank {
        return Err(GprError::Domain(format!(
            "k must satisfy 1 <= k < min(n_samples, n_traces) = {max_rank}, got {k}"
        )));
    }
    let mut svd = b.data.clone().svd(true, true);
    // nalgebra returns singular values in descending order.
    for s in svd.singular_values.iter_mut().take(k) {
        *s = 0.0;
    }
    let out = svd
        .recompose()
        .map_err(|e| GprError::Domain(format!("SVD recomposition failed: {e}")))?;
    b.with_data(out)
}

/// Singular values of the scan, descending; exposed for diagnostics.
pub fn singular_values(b: &Bscan) -> Vec<f64> {
    b.data.clone().singular_values().iter().copied().collect()
}

/// Signal-to-clutter ratio: max |amplitude| inside the window over max
/// |amplitude| outside. Zero clutter yields `+inf`.
pub fn scr(b: &Bscan, window: &TargetWindow) -> Result<f64> {
    window.validate_for(&b.grid)?;
    let full_rows = window.t_lo == 0 && window.t_hi == b.grid.n_samples;
    let full_cols = window.x_lo == 0 && window.x_hi == b.grid.n_traces;
    if full_rows && full_cols {
        return Err(GprError::Domain(
            "the window covers the whole scan; no clutter region remains".into(),
        ));
    }
    let mut inside: f64 = 0.0;
    let mut outside: f64 = 0.0;
    for j in 0..b.data.ncols() {
        for i in 0..b.data.nrows() {
            let v = b.data[(i, j)].abs();
            if window.contains(i, j) {
                inside = inside.max(v);
            } else {
                outside = outside.max(v);
            }
        }
    }
    if outside == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(inside / outside)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Channel, Frame};
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn scan(rows: usize, cols: usize, data: DMatrix<f64>) -> Bscan {
        let grid = SurveyGrid::new(0.01, 0.01, rows, cols, 3.0).unwrap();
        Bscan::new(grid, Channel::Hh, Frame::I, data).unwrap()
    }

    #[test]
    fn constant_columns_vanish() {
        let m = DMatrix::from_fn(4, 5, |i, _| i as f64 + 1.0);
        let out = mean_subtract(&scan(4, 5, m), None).unwrap();
        assert!(out.max_abs() < 1e-14);
    }

    #[test]
    fn reference_background_removes_exactly_the_clutter() {
        let clutter = DMatrix::from_fn(4, 5, |i, _| (i as f64).sin());
        let target = DMatrix::from_fn(4, 5, |i, j| if i == 2 && j == 2 { 3.0 } else { 0.0 });
        let b = scan(4, 5, &clutter + &target);
        let bg = scan(4, 5, clutter);
        let out = mean_subtract(&b, Some(&bg)).unwrap();
        for j in 0..5 {
            for i in 0..4 {
                assert_relative_eq!(out.data[(i, j)], target[(i, j)], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn two_equal_traces_cancel() {
        // Degenerate near-single-trace case: every trace equals the mean.
        let m = DMatrix::from_fn(4, 2, |i, _| i as f64 * 2.0 - 1.0);
        let out = mean_subtract(&scan(4, 2, m), None).unwrap();
        assert!(out.max_abs() < 1e-14);
    }

    #[test]
    fn background_grid_mismatch_is_an_error() {
        let b = scan(4, 5, DMatrix::zeros(4, 5));
        let bg = scan(4, 4, DMatrix::zeros(4, 4));
        assert!(matches!(mean_subtract(&b, Some(&bg)), Err(GprError::Dimension(_))));
    }

    #[test]
    fn rank_one_annihilation() {
        let u = DVector::from_fn(6, |i, _| (i as f64 + 1.0).sqrt());
        let v = DVector::from_fn(4, |i, _| (i as f64 - 1.5) * 0.3);
        let m = &u * v.transpose();
        let out = svd_remove_largest(&scan(6, 4, m.clone()), 1).unwrap();
        assert!(out.max_abs() <= 1e-10 * m.amax());
    }

    #[test]
    fn spectral_surgery_keeps_the_small_component() {
        // Orthogonal columns with singular values {5, 1}.
        let mut m = DMatrix::zeros(4, 3);
        m[(0, 0)] = 5.0;
        m[(1, 1)] = 1.0;
        let out = svd_remove_largest(&scan(4, 3, m), 1).unwrap();
        assert_relative_eq!(out.data[(1, 1)], 1.0, epsilon = 1e-10);
        assert!(out.data[(0, 0)].abs() < 1e-10);
    }

    #[test]
    fn k_out_of_range() {
        let b = scan(4, 3, DMatrix::zeros(4, 3));
        assert!(matches!(svd_remove_largest(&b, 0), Err(GprError::Domain(_))));
        assert!(matches!(svd_remove_largest(&b, 3), Err(GprError::Domain(_))));
    }

    #[test]
    fn svd_energy_identity_and_spectrum_shift() {
        let m = DMatrix::from_fn(8, 6, |i, j| ((i * 7 + j * 3) as f64 * 0.37).sin());
        let b = scan(8, 6, m);
        let sv_in = singular_values(&b);
        let out = svd_remove_largest(&b, 1).unwrap();
        let sv_out = singular_values(&out);
        assert_relative_eq!(sv_out[0], sv_in[1], max_relative = 1e-9);
        let e_in: f64 = b.data.iter().map(|v| v * v).sum();
        let e_out: f64 = out.data.iter().map(|v| v * v).sum();
        assert_relative_eq!(e_out, e_in - sv_in[0] * sv_in[0], max_relative = 1e-9);
    }

    #[test]
    fn scr_examples() {
        let mut m = DMatrix::zeros(4, 4);
        m[(1, 1)] = 2.0;
        let w = TargetWindow::new(0, 2, 0, 2).unwrap();
        let b = scan(4, 4, m.clone());
        assert_eq!(scr(&b, &w).unwrap(), f64::INFINITY);

        m[(3, 3)] = 2.0;
        let b = scan(4, 4, m.clone());
        assert_eq!(scr(&b, &w).unwrap(), 1.0);

        m[(3, 3)] = 0.5;
        let b = scan(4, 4, m);
        assert_eq!(scr(&b, &w).unwrap(), 4.0);
    }

    #[test]
    fn scr_rejects_whole_scan_window() {
        let b = scan(4, 4, DMatrix::zeros(4, 4));
        let w = TargetWindow::new(0, 4, 0, 4).unwrap();
        assert!(scr(&b, &w).is_err());
        let oversize = TargetWindow::new(0, 5, 0, 4).unwrap();
        assert!(matches!(scr(&b, &oversize), Err(GprError::Dimension(_))));
    }

    proptest! {
        #[test]
        fn mean_subtract_zero_row_means_and_linearity(
            vals in proptest::collection::vec(-10.0f64..10.0, 20),
            a in -3.0f64..3.0,
            c in -3.0f64..3.0,
        ) {
            let x = DMatrix::from_row_slice(4, 5, &vals);
            let y = DMatrix::from_fn(4, 5, |i, j| ((i + 2 * j) as f64 * 0.77).cos());
            let out = mean_subtract(&scan(4, 5, x.clone()), None).unwrap();
            for i in 0..4 {
                let row_mean: f64 = out.data.row(i).iter().sum::<f64>() / 5.0;
                prop_assert!(row_mean.abs() <= 1e-12);
            }
            // f(a·X + c·Y) = a·f(X) + c·f(Y)
            let combo = mean_subtract(&scan(4, 5, &x * a + &y * c), None).unwrap();
            let fx = mean_subtract(&scan(4, 5, x), None).unwrap();
            let fy = mean_subtract(&scan(4, 5, y), None).unwrap();
            let want = fx.data * a + fy.data * c;
            for (u, v) in combo.data.iter().zip(want.iter()) {
                prop_assert!((u - v).abs() <= 1e-10);
            }
        }
    }
}
