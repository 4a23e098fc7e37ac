//! Laplacian-penalized sparse regression
//!
//! ```text
//! ½‖y − Xβ‖² + P_λ₁(β) + (λ₂/2) βᵀΓβ
//! ```
//!
//! solved by cyclic coordinate descent ([`coordinate_descent_fit`]), with an
//! independent augmented-data lasso route ([`augmented_lasso_fit`]) and the
//! optimality and grouping diagnostics used to check both.

mod augmented;
mod cd;
mod grouping;
mod lasso;

pub use augmented::{augmented_design, augmented_lasso_fit};
pub use cd::coordinate_descent_fit;
pub use grouping::{grouping_gap, GroupingDiagnostic};
pub use lasso::{lasso_fit, LassoFit};

use ndarray::{Array1, Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::LaplacianMatrix;
use crate::linalg::{check_finite, check_finite_vec};
use crate::scalar::{sign, Real};

/// Response, design and penalty kernel of one fit.
///
/// The solver accepts any column scaling; callers normally pass columns
/// standardized with [`crate::numeric::standardize_columns`].
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionProblem<T> {
    pub y: Array1<T>,
    pub x: Array2<T>,
    pub gamma: LaplacianMatrix<T>,
}

impl<T: Real> RegressionProblem<T> {
    pub fn new(y: Array1<T>, x: Array2<T>, gamma: LaplacianMatrix<T>) -> Result<Self> {
        let (n, p) = x.dim();
        if y.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "y has length {}, X has {n} rows",
                y.len()
            )));
        }
        if gamma.dim() != p {
            return Err(Error::DimensionMismatch(format!(
                "Laplacian is {0}x{0}, X has {p} columns",
                gamma.dim()
            )));
        }
        if n == 0 || p == 0 {
            return Err(Error::DimensionMismatch("empty design".into()));
        }
        check_finite(x.view())?;
        check_finite_vec(y.view())?;
        Ok(Self { y, x, gamma })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn residual(&self, beta: ArrayView1<T>) -> Array1<T> {
        &self.y - &self.x.dot(&beta)
    }

    /// `‖Xᵀy‖_∞`, the smallest λ₁ giving the all-zero lasso solution.
    /// `‖Xᵀy‖_∞`, summed in the same order as the coordinate updates so that
    /// `λ₁ = lambda1_max()` yields the null fit exactly.
    pub fn lambda1_max(&self) -> T {
        let xt = self.x.t().as_standard_layout().into_owned();
        xt.rows()
            .into_iter()
            .fold(T::zero(), |a, row| a.max(row.dot(&self.y).abs()))
    }

    fn check_beta(&self, beta: ArrayView1<T>) -> Result<()> {
        if beta.len() != self.p() {
            return Err(Error::DimensionMismatch(format!(
                "beta has length {}, problem has {} columns",
                beta.len(),
                self.p()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PenaltyKind<T> {
    L1,
    /// Minimax concave penalty with concavity `gamma > 1`. Nonconvex: fits are local minima.
    Mcp {
        gamma: T,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec<T> {
    pub lambda1: T,
    pub kind: PenaltyKind<T>,
}

impl<T: Real> PenaltySpec<T> {
    pub fn l1(lambda1: T) -> Self {
        Self {
            lambda1,
            kind: PenaltyKind::L1,
        }
    }

    pub fn mcp(lambda1: T, gamma: T) -> Self {
        Self {
            lambda1,
            kind: PenaltyKind::Mcp { gamma },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda1 >= T::zero()) || !self.lambda1.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "lambda1 must be nonnegative, got {}",
                self.lambda1
            )));
        }
        if let PenaltyKind::Mcp { gamma } = self.kind {
            if !(gamma > T::one()) {
                return Err(Error::InvalidArgument(format!(
                    "MCP gamma must exceed 1, got {gamma}"
                )));
            }
        }
        Ok(())
    }

    /// `P_λ₁(t)` for one coefficient.
    pub fn value_at(&self, t: T) -> T {
        let lam = self.lambda1;
        match self.kind {
            PenaltyKind::L1 => lam * t.abs(),
            PenaltyKind::Mcp { gamma } => {
                let a = t.abs();
                if a <= gamma * lam {
                    lam * a - a * a / (T::of(2.0) * gamma)
                } else {
                    gamma * lam * lam / T::of(2.0)
                }
            }
        }
    }

    pub fn value(&self, beta: ArrayView1<T>) -> T {
        beta.iter().map(|b| self.value_at(*b)).sum()
    }

    /// Magnitude of the penalty derivative at a nonzero coefficient.
    fn slope_at(&self, t: T) -> T {
        match self.kind {
            PenaltyKind::L1 => self.lambda1,
            PenaltyKind::Mcp { gamma } => (self.lambda1 - t.abs() / gamma).max(T::zero()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaInit<T> {
    /// `Xᵀy / n`.
    Marginal,
    Zeros,
    Custom(Array1<T>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig<T> {
    pub lambda2: T,
    /// Stop once `Σⱼ |Δβⱼ| < tol` over a pass and the KKT residual is at most `10·tol`.
    pub tol: T,
    pub max_passes: usize,
    pub init: BetaInit<T>,
    /// Keep the objective after every pass in [`FitResult::trace`].
    pub record_trace: bool,
}

impl<T: Real> SolverConfig<T> {
    pub fn new(lambda2: T) -> Self {
        Self {
            lambda2,
            tol: T::of(1e-4),
            max_passes: 1000,
            init: BetaInit::Marginal,
            record_trace: false,
        }
    }

    pub fn with_tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_init(mut self, init: BetaInit<T>) -> Self {
        self.init = init;
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda2 >= T::zero()) || !self.lambda2.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "lambda2 must be nonnegative, got {}",
                self.lambda2
            )));
        }
        if !(self.tol > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_passes == 0 {
            return Err(Error::InvalidArgument("max_passes must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult<T> {
    pub beta: Array1<T>,
    pub active_set: Vec<usize>,
    pub objective: T,
    pub passes_used: usize,
    pub converged: bool,
    pub kkt_residual: T,
    pub lambda1: T,
    pub lambda2: T,
    /// Objective at the starting point and after each pass, when requested.
    pub trace: Vec<T>,
}

/// The JSON shape of a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub lambda1: f64,
    pub lambda2: f64,
    pub beta: Vec<f64>,
    pub active_set: Vec<usize>,
    pub objective: f64,
    pub kkt_residual: f64,
    pub converged: bool,
}

impl<T: Real> FitResult<T> {
    pub fn support_size(&self) -> usize {
        self.active_set.len()
    }

    pub fn summary(&self) -> FitSummary {
        FitSummary {
            lambda1: self.lambda1.as_f64(),
            lambda2: self.lambda2.as_f64(),
            beta: self.beta.iter().map(|b| b.as_f64()).collect(),
            active_set: self.active_set.clone(),
            objective: self.objective.as_f64(),
            kkt_residual: self.kkt_residual.as_f64(),
            converged: self.converged,
        }
    }

    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                what: "coordinate descent",
                iterations: self.passes_used,
            })
        }
    }
}

pub(crate) fn active_set<T: Real>(beta: ArrayView1<T>) -> Vec<usize> {
    beta.iter()
        .enumerate()
        .filter(|(_, b)| **b != T::zero())
        .map(|(j, _)| j)
        .collect()
}

/// `½‖y − Xβ‖² + P_λ₁(β) + (λ₂/2) βᵀΓβ`.
pub fn objective_value<T: Real>(
    prob: &RegressionProblem<T>,
    beta: ArrayView1<T>,
    pen: &PenaltySpec<T>,
    lambda2: T,
) -> Result<T> {
    prob.check_beta(beta)?;
    let r = prob.residual(beta);
    Ok(objective_from_residual(prob, beta, &r, pen, lambda2))
}

pub(crate) fn objective_from_residual<T: Real>(
    prob: &RegressionProblem<T>,
    beta: ArrayView1<T>,
    residual: &Array1<T>,
    pen: &PenaltySpec<T>,
    lambda2: T,
) -> T {
    let half = T::of(0.5);
    let quad = if lambda2 == T::zero() {
        T::zero()
    } else {
        prob.gamma.quadratic_form(beta)
    };
    half * residual.dot(residual) + pen.value(beta) + half * lambda2 * quad
}

/// Largest violation of the stationarity conditions at `beta`:
/// `|gⱼ + λ₁ sign(βⱼ)|` for active coefficients and `max(0, |gⱼ| − λ₁)` for
/// zero ones, with `g = −Xᵀ(y − Xβ) + λ₂Γβ`. For MCP the active-coefficient
/// slope is `max(λ₁ − |βⱼ|/γ, 0)`.
pub fn kkt_check<T: Real>(
    prob: &RegressionProblem<T>,
    pen: &PenaltySpec<T>,
    lambda2: T,
    beta: ArrayView1<T>,
) -> Result<T> {
    prob.check_beta(beta)?;
    let r = prob.residual(beta);
    Ok(kkt_from_residual(prob, pen, lambda2, beta, &r))
}

pub(crate) fn kkt_from_residual<T: Real>(
    prob: &RegressionProblem<T>,
    pen: &PenaltySpec<T>,
    lambda2: T,
    beta: ArrayView1<T>,
    residual: &Array1<T>,
) -> T {
    let mut grad = -prob.x.t().dot(residual);
    if lambda2 != T::zero() {
        grad.scaled_add(lambda2, &prob.gamma.apply(beta));
    }
    let mut worst = T::zero();
    for (j, g) in grad.iter().enumerate() {
        let b = beta[j];
        let v = if b != T::zero() {
            (*g + sign(b) * pen.slope_at(b)).abs()
        } else {
            (g.abs() - pen.lambda1).max(T::zero())
        };
        worst = worst.max(v);
    }
    worst
}

pub(crate) fn initial_beta<T: Real>(
    prob: &RegressionProblem<T>,
    init: &BetaInit<T>,
) -> Result<Array1<T>> {
    match init {
        BetaInit::Marginal => Ok(prob.x.t().dot(&prob.y) / T::of_usize(prob.n())),
        BetaInit::Zeros => Ok(Array1::zeros(prob.p())),
        BetaInit::Custom(b) => {
            prob.check_beta(b.view())?;
            check_finite_vec(b.view())?;
            Ok(b.clone())
        }
    }
}

pub(crate) fn column_sq_norms<T: Real>(x: &Array2<T>) -> Array1<T> {
    x.map_axis(Axis(0), |c| c.dot(&c))
}
