//! Graphical lasso: ℓ1-penalized Gaussian likelihood for the precision matrix.
//!
//! Solved by block coordinate descent on the primal: each sweep visits the
//! columns in order and minimizes the objective exactly over one row/column
//! of `Θ` with the rest held fixed. For column `j`, with `Q = Θ₁₁⁻¹` (obtained
//! from the maintained `W = Θ⁻¹` by a Schur downdate), the off-diagonal part
//! solves the lasso
//!
//! ```text
//! min_x  a·xᵀQx + 2·s₁₂ᵀx + 2λ‖x‖₁,     a = σ̂ⱼⱼ (+ λ when the diagonal is penalized)
//! ```
//!
//! and the diagonal follows in closed form, `θⱼⱼ = 1/a + xᵀQx`. Every block
//! step is an exact minimization, so the objective never increases and `Θ`
//! stays positive definite.

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    check_finite, check_symmetric, cholesky, log_det_spd, min_eigenvalue, psd_tolerance,
    spd_inverse,
};
use crate::numeric::{log_space, max_abs_offdiag, soft_threshold};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlassoConfig<T> {
    pub lambda0: T,
    pub max_sweeps: usize,
    /// Relative change of `Θ̂` between sweeps; also the KKT target.
    pub tol: T,
    pub penalize_diagonal: bool,
}

impl<T: Real> GlassoConfig<T> {
    pub fn new(lambda0: T) -> Self {
        Self {
            lambda0,
            max_sweeps: 200,
            tol: T::of(1e-5),
            penalize_diagonal: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda0 >= T::zero()) || !self.lambda0.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "lambda0 must be a nonnegative finite number, got {}",
                self.lambda0
            )));
        }
        if !(self.tol > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidArgument("max_sweeps must be positive".into()));
        }
        Ok(())
    }
}

/// Estimated precision matrix and the graph it encodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionEstimate<T> {
    pub theta: Array2<T>,
    /// Pairs `(j, j')`, `j < j'`, with `θ̂ⱼⱼ' ≠ 0`.
    pub edges: Vec<(usize, usize)>,
    pub lambda0: T,
    pub converged: bool,
    pub sweeps: usize,
    pub kkt_residual: T,
    /// Objective after initialization and after every sweep.
    pub objective_trace: Vec<T>,
}

impl<T: Real> PrecisionEstimate<T> {
    pub fn dim(&self) -> usize {
        self.theta.nrows()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Wraps a known precision matrix (for example a ground truth) without fitting.
    pub fn from_theta(theta: Array2<T>) -> Result<Self> {
        check_finite(theta.view())?;
        check_symmetric(theta.view())?;
        if cholesky(theta.view()).is_none() {
            return Err(Error::NotPsd {
                min_eigenvalue: min_eigenvalue(theta.view())?.as_f64(),
            });
        }
        let edges = edge_set(theta.view());
        Ok(Self {
            theta,
            edges,
            lambda0: T::zero(),
            converged: true,
            sweeps: 0,
            kkt_residual: T::zero(),
            objective_trace: Vec::new(),
        })
    }
}

pub fn edge_set<T: Real>(theta: ArrayView2<T>) -> Vec<(usize, usize)> {
    let p = theta.nrows();
    let mut edges = Vec::new();
    for i in 0..p {
        for j in (i + 1)..p {
            if theta[[i, j]] != T::zero() {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// `-log|Θ| + tr(ΘΣ̂) + λ₀‖Θ‖₁` (off-diagonal ℓ1 unless the diagonal is penalized).
pub fn glasso_objective<T: Real>(
    sigma: ArrayView2<T>,
    theta: ArrayView2<T>,
    cfg: &GlassoConfig<T>,
) -> Result<T> {
    let logdet = log_det_spd(theta).ok_or_else(|| Error::NotPsd {
        min_eigenvalue: min_eigenvalue(theta)
            .map(|v| v.as_f64())
            .unwrap_or(f64::NAN),
    })?;
    let p = theta.nrows();
    let mut trace = T::zero();
    let mut l1 = T::zero();
    for i in 0..p {
        for j in 0..p {
            trace += theta[[i, j]] * sigma[[j, i]];
            if i != j || cfg.penalize_diagonal {
                l1 += theta[[i, j]].abs();
            }
        }
    }
    Ok(-logdet + trace + cfg.lambda0 * l1)
}

/// Largest violation of the subgradient optimality conditions
/// `Σ̂ − Θ⁻¹ + λ₀·Z = 0`, `Z ∈ ∂‖Θ‖₁`.
pub fn glasso_kkt_residual<T: Real>(
    sigma: ArrayView2<T>,
    theta: ArrayView2<T>,
    cfg: &GlassoConfig<T>,
) -> Result<T> {
    let w = spd_inverse(theta)?;
    Ok(kkt_from_inverse(sigma, theta, w.view(), cfg))
}

fn kkt_from_inverse<T: Real>(
    sigma: ArrayView2<T>,
    theta: ArrayView2<T>,
    w: ArrayView2<T>,
    cfg: &GlassoConfig<T>,
) -> T {
    let p = theta.nrows();
    let lam = cfg.lambda0;
    let mut worst = T::zero();
    for i in 0..p {
        for j in 0..p {
            let g = sigma[[i, j]] - w[[i, j]];
            let v = if i == j && !cfg.penalize_diagonal {
                g.abs()
            } else if theta[[i, j]] != T::zero() {
                (g + lam * theta[[i, j]].signum()).abs()
            } else {
                (g.abs() - lam).max(T::zero())
            };
            worst = worst.max(v);
        }
    }
    worst
}

/// Default λ₀ grid: 10 log-spaced values in `[0.01, 1] · max|offdiag Σ̂|`.
pub fn default_lambda0_grid<T: Real>(sigma: ArrayView2<T>) -> Vec<T> {
    let m = max_abs_offdiag(sigma);
    if m == T::zero() {
        return vec![T::of(0.01), T::one()];
    }
    log_space(T::of(0.01) * m, m, 10)
}

struct ColumnLasso<T> {
    q: Array2<T>,
    s: Array1<T>,
    x: Array1<T>,
    g: Array1<T>,
}

impl<T: Real> ColumnLasso<T> {
    fn coordinate_pass(&mut self, a: T, lam: T, only_active: bool) -> T {
        let m = self.x.len();
        let mut max_change = T::zero();
        for k in 0..m {
            if only_active && self.x[k] == T::zero() {
                continue;
            }
            let qkk = self.q[[k, k]];
            let r = self.s[k] + a * (self.g[k] - qkk * self.x[k]);
            let st = soft_threshold(r, lam);
            let new = if st == T::zero() {
                T::zero()
            } else {
                -st / (a * qkk)
            };
            let delta = new - self.x[k];
            if delta != T::zero() {
                for (gl, ql) in self.g.iter_mut().zip(self.q.column(k).iter()) {
                    *gl += delta * *ql;
                }
                self.x[k] = new;
                max_change = max_change.max(delta.abs() * a * qkk);
            }
        }
        max_change
    }

    fn solve(&mut self, a: T, lam: T, tol: T, max_iter: usize) {
        let mut iter = 0;
        while iter < max_iter {
            let change = self.coordinate_pass(a, lam, false);
            iter += 1;
            if change <= tol {
                break;
            }
            while iter < max_iter {
                let c = self.coordinate_pass(a, lam, true);
                iter += 1;
                if c <= tol {
                    break;
                }
            }
        }
    }
}

/// Fits the graphical lasso to a sample covariance matrix.
///
/// Returns the best iterate with `converged = false` when the sweep limit is
/// reached before both the relative-change and KKT criteria hold.
pub fn glasso_fit<T: Real>(
    sigma: ArrayView2<T>,
    cfg: &GlassoConfig<T>,
) -> Result<PrecisionEstimate<T>> {
    cfg.validate()?;
    check_finite(sigma)?;
    check_symmetric(sigma)?;
    let p = sigma.nrows();
    if p == 0 {
        return Err(Error::DimensionMismatch("empty covariance matrix".into()));
    }
    // PSD within tolerance: Cholesky of the slightly inflated matrix
    let tol_psd = psd_tolerance(sigma);
    let mut inflated = sigma.to_owned();
    for j in 0..p {
        inflated[[j, j]] += tol_psd + T::min_positive_value();
    }
    if cholesky(inflated.view()).is_none() {
        return Err(Error::NotPsd {
            min_eigenvalue: min_eigenvalue(sigma)?.as_f64(),
        });
    }
    if cfg.lambda0 == T::zero() && cholesky(sigma).is_none() {
        // unpenalized likelihood is unbounded below for a singular Σ̂
        return Err(Error::NotPsd {
            min_eigenvalue: min_eigenvalue(sigma)?.as_f64(),
        });
    }
    let lam = cfg.lambda0;
    let diag_add = if cfg.penalize_diagonal {
        lam
    } else {
        T::zero()
    };
    let a: Vec<T> = (0..p).map(|j| sigma[[j, j]] + diag_add).collect();
    if let Some(j) = a.iter().position(|v| !(*v > T::zero())) {
        return Err(Error::ConstantColumn(j));
    }

    let mut theta = Array2::<T>::zeros((p, p));
    let mut w = Array2::<T>::zeros((p, p));
    for j in 0..p {
        theta[[j, j]] = T::one() / a[j];
        w[[j, j]] = a[j];
    }
    let mut trace = vec![glasso_objective(sigma, theta.view(), cfg)?];

    if p == 1 {
        return Ok(PrecisionEstimate {
            edges: Vec::new(),
            lambda0: lam,
            converged: true,
            sweeps: 0,
            kkt_residual: kkt_from_inverse(sigma, theta.view(), w.view(), cfg),
            objective_trace: trace,
            theta,
        });
    }

    let inner_tol = cfg.tol * T::of(1e-2);
    let inner_max = 10_000;
    let mut converged = false;
    let mut sweeps = 0;
    let mut kkt = T::infinity();
    let others: Vec<Vec<usize>> = (0..p)
        .map(|j| (0..p).filter(|&k| k != j).collect())
        .collect();

    while sweeps < cfg.max_sweeps {
        let previous = theta.clone();
        for j in 0..p {
            let idx = &others[j];
            let m = p - 1;
            let wjj = w[[j, j]];
            let mut q = Array2::<T>::zeros((m, m));
            for (ra, &ia) in idx.iter().enumerate() {
                let wa = w[[ia, j]];
                for (rb, &ib) in idx.iter().enumerate() {
                    q[[ra, rb]] = w[[ia, ib]] - wa * w[[ib, j]] / wjj;
                }
            }
            let s = Array1::from_iter(idx.iter().map(|&i| sigma[[i, j]]));
            let x = Array1::from_iter(idx.iter().map(|&i| theta[[i, j]]));
            let g = q.dot(&x);
            let mut sub = ColumnLasso { q, s, x, g };
            sub.solve(a[j], lam, inner_tol, inner_max);

            let u = sub.q.dot(&sub.x);
            let quad: T = sub.x.dot(&u);
            theta[[j, j]] = T::one() / a[j] + quad;
            for (ra, &ia) in idx.iter().enumerate() {
                theta[[ia, j]] = sub.x[ra];
                theta[[j, ia]] = sub.x[ra];
            }
            w[[j, j]] = a[j];
            for (ra, &ia) in idx.iter().enumerate() {
                let v = -a[j] * u[ra];
                w[[ia, j]] = v;
                w[[j, ia]] = v;
                for (rb, &ib) in idx.iter().enumerate() {
                    w[[ia, ib]] = sub.q[[ra, rb]] + a[j] * u[ra] * u[rb];
                }
            }
        }
        sweeps += 1;
        if let Ok(fresh) = spd_inverse(theta.view()) {
            w = fresh;
        }
        trace.push(glasso_objective(sigma, theta.view(), cfg)?);

        let scale = crate::linalg::max_abs(theta.view());
        let change = (&theta - &previous)
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.abs()));
        if change <= cfg.tol * scale {
            kkt = kkt_from_inverse(sigma, theta.view(), w.view(), cfg);
            if kkt <= cfg.tol {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        kkt = kkt_from_inverse(sigma, theta.view(), w.view(), cfg);
        log::warn!("graphical lasso stopped after {sweeps} sweeps (lambda0 = {lam}, kkt = {kkt})");
    }
    let edges = edge_set(theta.view());
    Ok(PrecisionEstimate {
        theta,
        edges,
        lambda0: lam,
        converged,
        sweeps,
        kkt_residual: kkt,
        objective_trace: trace,
    })
}
