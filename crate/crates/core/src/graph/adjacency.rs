//! Correlation-based adjacency measures and the Fisher-transform threshold.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::linalg::{check_finite, check_square};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AdjacencyMeasure {
    /// `1{r > c}`, unsigned.
    N1,
    /// `1{|r| > c}`, signed.
    N2,
    /// `max(0, r)^k`, unsigned.
    N3,
    /// `|r|^k`, signed.
    N4,
    /// `|r|^k / (1 − |r|)`, signed.
    N5,
    /// Weights taken from an estimated precision matrix.
    Precision,
}

impl AdjacencyMeasure {
    pub fn from_index(k: u8) -> Option<Self> {
        match k {
            1 => Some(Self::N1),
            2 => Some(Self::N2),
            3 => Some(Self::N3),
            4 => Some(Self::N4),
            5 => Some(Self::N5),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::N1 => "N1",
            Self::N2 => "N2",
            Self::N3 => "N3",
            Self::N4 => "N4",
            Self::N5 => "N5",
            Self::Precision => "PRECISION",
        }
    }

    fn needs_threshold(self) -> bool {
        matches!(self, Self::N1 | Self::N2)
    }
}

/// Symmetric weights `aⱼⱼ' ≥ 0` with zero diagonal and signs `sⱼⱼ' ∈ {−1, +1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjacencyMatrix<T> {
    pub weights: Array2<T>,
    pub signs: Array2<i8>,
    pub measure: AdjacencyMeasure,
}

impl<T: Real> AdjacencyMatrix<T> {
    pub fn dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn edge_count(&self) -> usize {
        let p = self.dim();
        let mut c = 0;
        for i in 0..p {
            for j in (i + 1)..p {
                if self.weights[[i, j]] != T::zero() {
                    c += 1;
                }
            }
        }
        c
    }
}

/// Correlation threshold from a Bonferroni-corrected two-sided Fisher z-test:
/// `tanh(z_{1−α'/2} / √(n−3))` with `α' = α / (p(p−1)/2)`.
pub fn fisher_threshold(n: usize, alpha: f64, p: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "Fisher threshold needs n >= 4, got {n}"
        )));
    }
    if p < 2 {
        return Err(Error::InvalidArgument(format!(
            "Fisher threshold needs at least two variables, got {p}"
        )));
    }
    let pairs = (p * (p - 1) / 2) as f64;
    let corrected = alpha / pairs;
    let z = Normal::standard().inverse_cdf(1.0 - corrected / 2.0);
    Ok((z / ((n - 3) as f64).sqrt()).tanh())
}

/// Builds one of the five correlation adjacency measures.
///
/// `threshold` is used by N1/N2 and must lie in (0, 1); `power` (`k`) is used
/// by N3–N5 and must be positive.
pub fn adjacency_from_correlation<T: Real>(
    r: ArrayView2<T>,
    measure: AdjacencyMeasure,
    threshold: T,
    power: T,
) -> Result<AdjacencyMatrix<T>> {
    let p = check_square(r, "correlation")?;
    check_finite(r)?;
    if measure == AdjacencyMeasure::Precision {
        return Err(Error::InvalidArgument(
            "precision adjacency comes from a PrecisionEstimate, not a correlation matrix".into(),
        ));
    }
    if measure.needs_threshold() && !(threshold > T::zero() && threshold < T::one()) {
        return Err(Error::InvalidArgument(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    if !measure.needs_threshold() && !(power > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "power k must be positive, got {power}"
        )));
    }
    let tol = T::of(1e-12);
    for i in 0..p {
        if (r[[i, i]] - T::one()).abs() > tol {
            return Err(Error::InvalidArgument(format!(
                "correlation diagonal must be 1, got {} at {i}",
                r[[i, i]]
            )));
        }
        for j in 0..p {
            if r[[i, j]].abs() > T::one() + tol || (r[[i, j]] - r[[j, i]]).abs() > tol {
                return Err(Error::InvalidArgument(format!(
                    "invalid correlation entry at ({i}, {j})"
                )));
            }
        }
    }

    let mut weights = Array2::<T>::zeros((p, p));
    let mut signs = Array2::<i8>::ones((p, p));
    for i in 0..p {
        for j in (i + 1)..p {
            let rij = r[[i, j]].max(-T::one()).min(T::one());
            let sgn: i8 = if rij < T::zero() { -1 } else { 1 };
            let (a, s) = match measure {
                AdjacencyMeasure::N1 => (indicator(rij > threshold), 1),
                AdjacencyMeasure::N2 => (indicator(rij.abs() > threshold), sgn),
                AdjacencyMeasure::N3 => (rij.max(T::zero()).powf(power), 1),
                AdjacencyMeasure::N4 => (rij.abs().powf(power), sgn),
                AdjacencyMeasure::N5 => {
                    if rij.abs() >= T::one() {
                        return Err(Error::DivergentWeight(i, j));
                    }
                    (rij.abs().powf(power) / (T::one() - rij.abs()), sgn)
                }
                AdjacencyMeasure::Precision => unreachable!(),
            };
            weights[[i, j]] = a;
            weights[[j, i]] = a;
            signs[[i, j]] = s;
            signs[[j, i]] = s;
        }
    }
    Ok(AdjacencyMatrix {
        weights,
        signs,
        measure,
    })
}

fn indicator<T: Real>(b: bool) -> T {
    if b {
        T::one()
    } else {
        T::zero()
    }
}
