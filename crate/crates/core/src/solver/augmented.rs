use ndarray::{s, Array1, Array2};

use super::{
    active_set, kkt_check, objective_value, FitResult, PenaltyKind, PenaltySpec, RegressionProblem,
    SolverConfig,
};
use crate::error::{Error, Result};
use crate::linalg::chol_or_eigh_factor;
use crate::scalar::Real;

/// Augmented data `(y*, X*)` with `X* = (1+λ₂)^{-1/2} [X; √λ₂ L]`, `y* = [y; 0]`
/// and `LᵀL = Γ`.
pub fn augmented_design<T: Real>(
    prob: &RegressionProblem<T>,
    lambda2: T,
) -> Result<(Array1<T>, Array2<T>)> {
    let (n, p) = prob.x.dim();
    let l = chol_or_eigh_factor(prob.gamma.gamma.view())?;
    let scale = T::one() / (T::one() + lambda2).sqrt();
    let mut xs = Array2::<T>::zeros((n + p, p));
    xs.slice_mut(s![..n, ..]).assign(&(&prob.x * scale));
    xs.slice_mut(s![n.., ..])
        .assign(&(&l * (lambda2.sqrt() * scale)));
    let mut ys = Array1::<T>::zeros(n + p);
    ys.slice_mut(s![..n]).assign(&prob.y);
    Ok((ys, xs))
}

/// Solves the L1 problem through a plain lasso on augmented data.
///
/// Since `‖y* − X*β*‖² = ‖y − Xβ‖² + λ₂βᵀΓβ` for `β* = √(1+λ₂)·β`, the
/// Laplacian fit equals `β*/√(1+λ₂)` where `β*` is the lasso solution on
/// `(y*, X*)` at penalty `λ₁/√(1+λ₂)`.
pub fn augmented_lasso_fit<T: Real>(
    prob: &RegressionProblem<T>,
    pen: &PenaltySpec<T>,
    cfg: &SolverConfig<T>,
) -> Result<FitResult<T>> {
    pen.validate()?;
    cfg.validate()?;
    if !matches!(pen.kind, PenaltyKind::L1) {
        return Err(Error::InvalidArgument(
            "the augmented-data route only covers the L1 penalty".into(),
        ));
    }
    let lambda2 = cfg.lambda2;
    let (ys, xs) = augmented_design(prob, lambda2)?;
    let root = (T::one() + lambda2).sqrt();
    let star = super::lasso_fit(
        ys.view(),
        xs.view(),
        pen.lambda1 / root,
        cfg.tol,
        cfg.max_passes,
    )?;
    let beta = star.beta / root;
    let objective = objective_value(prob, beta.view(), pen, lambda2)?;
    let kkt = kkt_check(prob, pen, lambda2, beta.view())?;
    Ok(FitResult {
        active_set: active_set(beta.view()),
        beta,
        objective,
        passes_used: star.passes,
        converged: star.converged,
        kkt_residual: kkt,
        lambda1: pen.lambda1,
        lambda2,
        trace: Vec::new(),
    })
}
