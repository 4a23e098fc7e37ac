use ndarray::{Array1, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::numeric::soft_threshold;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit<T> {
    pub beta: Array1<T>,
    pub passes: usize,
    pub converged: bool,
    pub kkt_residual: T,
}

/// Plain lasso `½‖y − Xβ‖² + λ‖β‖₁` by covariance-form coordinate descent.
///
/// Works on the Gram matrix `XᵀX` and `Xᵀy` and keeps the gradient `XᵀXβ`
/// current, so no residual vector is ever formed. Stops when a pass moves
/// `Σ|Δβ|` by less than `tol` and the KKT residual is at most `tol`.
pub fn lasso_fit<T: Real>(
    y: ArrayView1<T>,
    x: ArrayView2<T>,
    lambda: T,
    tol: T,
    max_passes: usize,
) -> Result<LassoFit<T>> {
    let (n, p) = x.dim();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "y has length {}, X has {n} rows",
            y.len()
        )));
    }
    if !(lambda >= T::zero()) || !(tol > T::zero()) {
        return Err(Error::InvalidArgument(
            "lasso needs lambda >= 0 and tol > 0".into(),
        ));
    }
    let gram = x.t().dot(&x);
    let xty = x.t().dot(&y);
    let mut beta = Array1::<T>::zeros(p);
    let mut grad = Array1::<T>::zeros(p); // XᵀX β
    let mut passes = 0;
    let mut converged = false;
    let mut kkt = T::infinity();
    while passes < max_passes {
        let mut moved = T::zero();
        for j in 0..p {
            let gjj = gram[[j, j]];
            if gjj == T::zero() {
                continue;
            }
            let old = beta[j];
            let a = xty[j] - (grad[j] - gjj * old);
            let new = soft_threshold(a, lambda) / gjj;
            let delta = new - old;
            if delta != T::zero() {
                grad.scaled_add(delta, &gram.column(j));
                beta[j] = new;
                moved += delta.abs();
            }
        }
        passes += 1;
        if moved < tol {
            grad = gram.dot(&beta);
            kkt = kkt_residual(&xty, &grad, &beta, lambda);
            if kkt <= tol {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        kkt = kkt_residual(&xty, &gram.dot(&beta), &beta, lambda);
    }
    Ok(LassoFit {
        beta,
        passes,
        converged,
        kkt_residual: kkt,
    })
}

fn kkt_residual<T: Real>(xty: &Array1<T>, grad: &Array1<T>, beta: &Array1<T>, lambda: T) -> T {
    let mut worst = T::zero();
    for j in 0..beta.len() {
        let g = grad[j] - xty[j];
        let v = if beta[j] != T::zero() {
            (g + lambda * beta[j].signum()).abs()
        } else {
            (g.abs() - lambda).max(T::zero())
        };
        worst = worst.max(v);
    }
    worst
}
