//! Scalar operators and column statistics.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::check_finite;
use crate::scalar::Real;

/// `sign(a) · max(|a| − b, 0)`, the proximal map of `b·|x|`.
#[inline]
pub fn soft_threshold<T: Real>(a: T, b: T) -> T {
    debug_assert!(b >= T::zero());
    if a > b {
        a - b
    } else if a < -b {
        a + b
    } else {
        T::zero()
    }
}

/// Column centering and scaling learned on one data set, reusable on another.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization<T> {
    pub means: Array1<T>,
    pub scales: Array1<T>,
}

impl<T: Real> Standardization<T> {
    /// Applies the stored parameters to new rows with the same columns.
    pub fn apply(&self, x: ArrayView2<T>) -> Result<Array2<T>> {
        if x.ncols() != self.means.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} columns, got {}",
                self.means.len(),
                x.ncols()
            )));
        }
        let mut out = x.to_owned();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (m, s) = (self.means[j], self.scales[j]);
            col.mapv_inplace(|v| (v - m) / s);
        }
        Ok(out)
    }

    /// Maps coefficients fitted on standardized columns back to the raw scale.
    pub fn unscale_coefficients(&self, beta: &Array1<T>) -> Array1<T> {
        beta / &self.scales
    }
}

/// Centers every column and scales it so that `(1/n) Σᵢ x²ᵢⱼ = 1`.
pub fn standardize_columns<T: Real>(x: ArrayView2<T>) -> Result<(Array2<T>, Standardization<T>)> {
    let (n, p) = x.dim();
    if n < 2 {
        return Err(Error::DimensionMismatch(format!(
            "standardization needs at least 2 rows, got {n}"
        )));
    }
    check_finite(x)?;
    let nf = T::of_usize(n);
    let mut means = Array1::<T>::zeros(p);
    let mut scales = Array1::<T>::zeros(p);
    let mut out = x.to_owned();
    for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
        let mean = col.sum() / nf;
        col.mapv_inplace(|v| v - mean);
        let ms = col.iter().map(|v| *v * *v).sum::<T>() / nf;
        let scale = ms.sqrt();
        // relative to the column magnitude so that (5, 5, 5) + rounding still counts as constant
        let mag = x.column(j).iter().fold(T::zero(), |a, v| a.max(v.abs()));
        if !(scale > T::epsilon() * T::of(16.0) * mag.max(T::min_positive_value())) {
            return Err(Error::ConstantColumn(j));
        }
        col.mapv_inplace(|v| v / scale);
        means[j] = mean;
        scales[j] = scale;
    }
    Ok((out, Standardization { means, scales }))
}

/// `(1/n) X_cᵀ X_c` with `X_c` the column-centered data.
pub fn sample_covariance<T: Real>(x: ArrayView2<T>) -> Result<Array2<T>> {
    let (n, p) = x.dim();
    if n < 2 {
        return Err(Error::DimensionMismatch(format!(
            "covariance needs at least 2 rows, got {n}"
        )));
    }
    if p == 0 {
        return Err(Error::DimensionMismatch(
            "covariance of zero columns".into(),
        ));
    }
    check_finite(x)?;
    let nf = T::of_usize(n);
    let means = x.sum_axis(Axis(0)) / nf;
    let xc = &x - &means.insert_axis(Axis(0));
    let mut s = xc.t().dot(&xc) / nf;
    for i in 0..p {
        for j in (i + 1)..p {
            let v = s[[j, i]];
            s[[i, j]] = v;
        }
    }
    Ok(s)
}

/// Converts a covariance matrix to a correlation matrix.
pub fn covariance_to_correlation<T: Real>(s: ArrayView2<T>) -> Result<Array2<T>> {
    let p = crate::linalg::check_square(s, "covariance")?;
    let mut r = s.to_owned();
    for j in 0..p {
        if !(s[[j, j]] > T::zero()) {
            return Err(Error::ConstantColumn(j));
        }
    }
    for i in 0..p {
        for j in 0..p {
            r[[i, j]] = if i == j {
                T::one()
            } else {
                (s[[i, j]] / (s[[i, i]] * s[[j, j]]).sqrt())
                    .max(-T::one())
                    .min(T::one())
            };
        }
    }
    Ok(r)
}

/// Largest absolute off-diagonal entry.
pub fn max_abs_offdiag<T: Real>(s: ArrayView2<T>) -> T {
    let mut m = T::zero();
    for ((i, j), v) in s.indexed_iter() {
        if i != j {
            m = m.max(v.abs());
        }
    }
    m
}

/// `count` log-spaced values from `lo` to `hi` inclusive, ascending.
pub fn log_space<T: Real>(lo: T, hi: T, count: usize) -> Vec<T> {
    match count {
        0 => Vec::new(),
        1 => vec![hi],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let step = (b - a) / T::of_usize(count - 1);
            (0..count)
                .map(|k| {
                    if k == count - 1 {
                        hi
                    } else if k == 0 {
                        lo
                    } else {
                        (a + step * T::of_usize(k)).exp()
                    }
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn soft_threshold_cases() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
        assert_eq!(soft_threshold(0.5, 1.0), 0.0);
    }

    proptest! {
        #[test]
        fn soft_threshold_is_the_l1_prox(a in -5.0f64..5.0, b in 0.0f64..3.0) {
            let f = |x: f64| 0.5 * (x - a).powi(2) + b * x.abs();
            let s = soft_threshold(a, b);
            // grid search over a fine grid around the candidates
            let mut best = f64::INFINITY;
            for k in -8000..=8000 {
                let x = k as f64 * 1e-3;
                best = best.min(f(x));
            }
            prop_assert!(f(s) <= best + 1e-12);
        }
    }

    #[test]
    fn standardized_column_has_unit_mean_square() {
        let x = array![[1.0], [2.0], [3.0]];
        let (z, st) = standardize_columns(x.view()).unwrap();
        let mean: f64 = z.column(0).sum() / 3.0;
        let ms: f64 = z.column(0).iter().map(|v| v * v).sum::<f64>() / 3.0;
        assert!(mean.abs() < 1e-15);
        assert!((ms - 1.0).abs() < 1e-15);
        assert!((z[[0, 0]] + 1.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(st.means[0], 2.0);
    }

    #[test]
    fn standardization_is_idempotent() {
        let x = array![[1.0f64, 4.0], [2.0, -1.0], [7.0, 0.5], [3.0, 2.0]];
        let (z, _) = standardize_columns(x.view()).unwrap();
        let (z2, _) = standardize_columns(z.view()).unwrap();
        for (a, b) in z.iter().zip(z2.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_column_is_rejected() {
        let x = array![[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]];
        assert!(matches!(
            standardize_columns(x.view()),
            Err(Error::ConstantColumn(1))
        ));
    }

    #[test]
    fn duplicated_columns_give_equal_covariance_rows() {
        let x = array![
            [1.0, 1.0, 0.3],
            [2.0, 2.0, -1.0],
            [0.5, 0.5, 2.0],
            [4.0, 4.0, 1.0]
        ];
        let s = sample_covariance(x.view()).unwrap();
        for k in 0..3 {
            assert_eq!(s[[0, k]], s[[1, k]]);
        }
    }

    #[test]
    fn covariance_of_standardized_has_unit_diagonal() {
        let x = array![
            [1.0f64, 4.0],
            [2.0, -1.0],
            [7.0, 0.5],
            [3.0, 2.0],
            [0.0, 0.0]
        ];
        let (z, _) = standardize_columns(x.view()).unwrap();
        let s = sample_covariance(z.view()).unwrap();
        assert!((s[[0, 0]] - 1.0).abs() < 1e-12);
        assert!((s[[1, 1]] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_space_endpoints() {
        let g = log_space(0.01, 1.0, 10);
        assert_eq!(g.len(), 10);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[9], 1.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
