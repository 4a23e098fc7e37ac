//! Graph Laplacian penalty kernels `Γ = D − A`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::adjacency::{AdjacencyMatrix, AdjacencyMeasure};
use super::glasso::PrecisionEstimate;
use crate::error::{Error, Result};
use crate::linalg::{check_finite, check_psd, check_square, check_symmetric, max_abs};
use crate::scalar::Real;

/// Where a penalty kernel came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LaplacianSource {
    Precision {
        lambda0: f64,
    },
    Adjacency(AdjacencyMeasure),
    /// `Γ = I`, the ridge term of the naive elastic net.
    Identity,
    /// `Γ = 0`, no quadratic penalty.
    Empty,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplacianMatrix<T> {
    pub gamma: Array2<T>,
    pub source: LaplacianSource,
}

impl<T: Real> LaplacianMatrix<T> {
    pub fn dim(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn zeros(p: usize) -> Self {
        Self {
            gamma: Array2::zeros((p, p)),
            source: LaplacianSource::Empty,
        }
    }

    pub fn identity(p: usize) -> Self {
        Self {
            gamma: Array2::eye(p),
            source: LaplacianSource::Identity,
        }
    }

    /// Wraps an arbitrary symmetric PSD kernel after checking it.
    pub fn from_matrix(gamma: Array2<T>) -> Result<Self> {
        check_finite(gamma.view())?;
        check_psd(gamma.view())?;
        Ok(Self {
            gamma,
            source: LaplacianSource::Custom,
        })
    }

    /// `βᵀΓβ`.
    pub fn quadratic_form(&self, beta: ArrayView1<T>) -> T {
        beta.dot(&self.gamma.dot(&beta))
    }

    pub fn apply(&self, beta: ArrayView1<T>) -> Array1<T> {
        self.gamma.dot(&beta)
    }
}

/// Anything with a signed weighted graph on `p` nodes.
pub enum GraphInput<'a, T> {
    Precision(&'a PrecisionEstimate<T>),
    Adjacency(&'a AdjacencyMatrix<T>),
}

impl<'a, T> From<&'a PrecisionEstimate<T>> for GraphInput<'a, T> {
    fn from(p: &'a PrecisionEstimate<T>) -> Self {
        GraphInput::Precision(p)
    }
}

impl<'a, T> From<&'a AdjacencyMatrix<T>> for GraphInput<'a, T> {
    fn from(a: &'a AdjacencyMatrix<T>) -> Self {
        GraphInput::Adjacency(a)
    }
}

/// Builds `Γ = D − A`.
///
/// For a precision estimate `A = Θ̂` and `dⱼ = Σⱼ' |θ̂ⱼⱼ'|` (the sum includes
/// `j' = j`), so `Γⱼⱼ = Σⱼ'≠ⱼ |θ̂ⱼⱼ'|` and `Γⱼⱼ' = −θ̂ⱼⱼ'`. For a correlation
/// adjacency the off-diagonal of `A` carries the signed weights `sⱼⱼ'|aⱼⱼ'|`.
/// Either way `βᵀΓβ = Σ_{j<j'} |aⱼⱼ'| (βⱼ − sⱼⱼ'βⱼ')²`.
pub fn laplacian_build<'a, T: Real>(
    input: impl Into<GraphInput<'a, T>>,
) -> Result<LaplacianMatrix<T>> {
    let (gamma, source) = match input.into() {
        GraphInput::Precision(est) => {
            let theta = est.theta.view();
            check_square(theta, "precision matrix")?;
            check_finite(theta)?;
            check_symmetric(theta)?;
            let p = theta.nrows();
            let mut gamma = theta.mapv(|v| -v);
            for j in 0..p {
                let d: T = theta.row(j).iter().map(|v| v.abs()).sum();
                gamma[[j, j]] += d;
            }
            (
                gamma,
                LaplacianSource::Precision {
                    lambda0: est.lambda0.as_f64(),
                },
            )
        }
        GraphInput::Adjacency(adj) => {
            let w = adj.weights.view();
            let p = check_square(w, "adjacency")?;
            check_finite(w)?;
            check_symmetric(w)?;
            if adj.signs.dim() != (p, p) {
                return Err(Error::DimensionMismatch(
                    "sign matrix does not match weights".into(),
                ));
            }
            let mut gamma = Array2::<T>::zeros((p, p));
            for i in 0..p {
                let mut d = T::zero();
                for j in 0..p {
                    if i == j {
                        continue;
                    }
                    let s = adj.signs[[i, j]];
                    if s != adj.signs[[j, i]] || (s != 1 && s != -1) {
                        return Err(Error::InvalidArgument(format!(
                            "sign matrix must be symmetric with entries ±1, got {s} at ({i}, {j})"
                        )));
                    }
                    let a = w[[i, j]].abs();
                    d += a;
                    gamma[[i, j]] = -T::of(s as f64) * a;
                }
                gamma[[i, i]] = d;
            }
            (gamma, LaplacianSource::Adjacency(adj.measure))
        }
    };
    check_diagonally_dominant(gamma.view())?;
    Ok(LaplacianMatrix { gamma, source })
}

/// Symmetric + weakly diagonally dominant with nonnegative diagonal ⇒ PSD.
fn check_diagonally_dominant<T: Real>(gamma: ArrayView2<T>) -> Result<()> {
    let p = gamma.nrows();
    let tol = T::of(1e-12) * max_abs(gamma).max(T::one());
    for i in 0..p {
        let off: T = (0..p)
            .filter(|&j| j != i)
            .map(|j| gamma[[i, j]].abs())
            .sum();
        if gamma[[i, i]] < off - tol {
            return Err(Error::NotPsd {
                min_eigenvalue: (gamma[[i, i]] - off).as_f64(),
            });
        }
    }
    Ok(())
}
