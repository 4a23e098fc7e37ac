use ndarray::{Array1, Array2};

use super::{
    active_set, column_sq_norms, initial_beta, kkt_from_residual, objective_from_residual,
    FitResult, PenaltyKind, PenaltySpec, RegressionProblem, SolverConfig,
};
use crate::error::{Error, Result};
use crate::numeric::soft_threshold;
use crate::scalar::Real;

/// Cyclic coordinate descent for the Laplacian-penalized objective.
///
/// Each pass visits `j = 0..p` in order and sets `βⱼ` to its exact coordinate
/// minimizer. With `a = xⱼᵀ(y − ỹ) − λ₂ Σ_{j'≠j} τⱼⱼ'βⱼ'` (`ỹ` the fit without
/// column `j`) and `d = ‖xⱼ‖² + λ₂τⱼⱼ`:
///
/// * L1: `βⱼ = S(a, λ₁) / d`
/// * MCP: `βⱼ = S(a, λ₁) / (d − 1/γ)` when `|a| ≤ γλ₁d`, else `a / d`
///
/// `d` reduces to `1 + λ₂τⱼⱼ` for unit-norm columns. The residual `y − Xβ` is
/// kept up to date after every coordinate. Iteration stops once a pass moves
/// `Σⱼ |Δβⱼ|` by less than `tol` and the KKT residual is at most `10·tol`.
pub fn coordinate_descent_fit<T: Real>(
    prob: &RegressionProblem<T>,
    pen: &PenaltySpec<T>,
    cfg: &SolverConfig<T>,
) -> Result<FitResult<T>> {
    pen.validate()?;
    cfg.validate()?;
    let p = prob.p();
    let lambda1 = pen.lambda1;
    let lambda2 = cfg.lambda2;
    let gamma = &prob.gamma.gamma;
    let col_sq = column_sq_norms(&prob.x);
    // contiguous columns
    let xt: Array2<T> = prob.x.t().as_standard_layout().into_owned();

    let denom: Array1<T> = Array1::from_iter((0..p).map(|j| col_sq[j] + lambda2 * gamma[[j, j]]));
    if let PenaltyKind::Mcp { gamma: g } = pen.kind {
        let inv = T::one() / g;
        if let Some(j) = denom.iter().position(|d| *d > T::zero() && *d <= inv) {
            return Err(Error::InvalidArgument(format!(
                "MCP coordinate {j} is nonconvex: ‖x‖² + λ₂τ = {} ≤ 1/γ",
                denom[j]
            )));
        }
    }

    // Above the null threshold zero is the exact solution for any λ₂; a
    // nonzero start would only drift back to within roundoff of it.
    let start = initial_beta(prob, &cfg.init)?;
    let mut beta = if lambda1 >= prob.lambda1_max() {
        Array1::zeros(p)
    } else {
        start
    };
    let mut resid = prob.residual(beta.view());
    let mut trace = Vec::new();
    if cfg.record_trace {
        trace.push(objective_from_residual(
            prob,
            beta.view(),
            &resid,
            pen,
            lambda2,
        ));
    }

    let ten = T::of(10.0);
    let mut passes = 0;
    let mut converged = false;
    let mut kkt = T::infinity();
    while passes < cfg.max_passes {
        let mut moved = T::zero();
        for j in 0..p {
            let old = beta[j];
            let xj = xt.row(j);
            let d = denom[j];
            if d == T::zero() {
                // zero column with no graph penalty: coordinate is free, keep it at zero
                if old != T::zero() {
                    beta[j] = T::zero();
                    moved += old.abs();
                }
                continue;
            }
            let mut a = xj.dot(&resid) + col_sq[j] * old;
            if lambda2 != T::zero() {
                let coupling = gamma.row(j).dot(&beta) - gamma[[j, j]] * old;
                a -= lambda2 * coupling;
            }
            let new = match pen.kind {
                PenaltyKind::L1 => soft_threshold(a, lambda1) / d,
                PenaltyKind::Mcp { gamma: g } => {
                    if a.abs() <= g * lambda1 * d {
                        soft_threshold(a, lambda1) / (d - T::one() / g)
                    } else {
                        a / d
                    }
                }
            };
            let delta = new - old;
            if delta != T::zero() {
                resid.scaled_add(-delta, &xj);
                beta[j] = new;
                moved += delta.abs();
            }
        }
        passes += 1;
        if cfg.record_trace {
            trace.push(objective_from_residual(
                prob,
                beta.view(),
                &resid,
                pen,
                lambda2,
            ));
        }
        if moved < cfg.tol {
            resid = prob.residual(beta.view());
            kkt = kkt_from_residual(prob, pen, lambda2, beta.view(), &resid);
            if kkt <= ten * cfg.tol {
                converged = true;
                break;
            }
        }
    }
    let resid = prob.residual(beta.view());
    if !converged {
        kkt = kkt_from_residual(prob, pen, lambda2, beta.view(), &resid);
        log::debug!(
            "coordinate descent hit max_passes = {} (lambda1 = {lambda1}, lambda2 = {lambda2}, kkt = {kkt})",
            cfg.max_passes
        );
    }
    let objective = objective_from_residual(prob, beta.view(), &resid, pen, lambda2);
    Ok(FitResult {
        active_set: active_set(beta.view()),
        beta,
        objective,
        passes_used: passes,
        converged,
        kkt_residual: kkt,
        lambda1,
        lambda2,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{laplacian_build, LaplacianMatrix, PrecisionEstimate};
    use crate::solver::{kkt_check, objective_value, BetaInit};
    use crate::RngSeed;
    use ndarray::{array, Array1};

    fn random_problem(n: usize, p: usize, seed: u64) -> RegressionProblem<f64> {
        let mut rng = RngSeed(seed).rng();
        let x: Array2<f64> = crate::sampling::standard_normal_matrix(n, p, &mut rng);
        let noise: Array1<f64> = crate::sampling::standard_normal_vector(n, &mut rng);
        let mut beta = Array1::zeros(p);
        beta[0] = 2.0;
        beta[1] = -1.5;
        beta[2] = 1.0;
        let y = x.dot(&beta) + noise;
        let mut theta = Array2::<f64>::eye(p);
        for j in 0..p - 1 {
            theta[[j, j + 1]] = 0.3;
            theta[[j + 1, j]] = 0.3;
        }
        let est = PrecisionEstimate::from_theta(theta).unwrap();
        RegressionProblem::new(y, x, laplacian_build(&est).unwrap()).unwrap()
    }

    #[test]
    fn null_threshold_gives_zero() {
        let prob = random_problem(30, 8, 1);
        let lam = prob.lambda1_max();
        for cfg in [
            SolverConfig::new(2.5).with_init(BetaInit::Zeros),
            SolverConfig::new(2.5),
            SolverConfig::new(0.0),
        ] {
            let fit = coordinate_descent_fit(&prob, &PenaltySpec::l1(lam), &cfg).unwrap();
            assert!(fit.beta.iter().all(|b| *b == 0.0));
            assert!(fit.active_set.is_empty());
            assert!(fit.converged);
        }
    }

    #[test]
    fn objective_field_matches_evaluation() {
        let prob = random_problem(40, 10, 2);
        let pen = PenaltySpec::l1(5.0);
        let fit = coordinate_descent_fit(&prob, &pen, &SolverConfig::new(1.0)).unwrap();
        let v = objective_value(&prob, fit.beta.view(), &pen, 1.0).unwrap();
        assert!((v - fit.objective).abs() <= 1e-10 * v.abs().max(1.0));
        assert_eq!(fit.active_set, active_set(fit.beta.view()));
    }

    #[test]
    fn trace_is_monotone_and_kkt_small() {
        let prob = random_problem(50, 12, 3);
        for (l1, l2) in [(1.0, 0.0), (5.0, 2.0), (20.0, 10.0)] {
            let pen = PenaltySpec::l1(l1);
            let cfg = SolverConfig::new(l2).with_trace();
            let fit = coordinate_descent_fit(&prob, &pen, &cfg).unwrap();
            assert!(fit.converged);
            assert!(fit
                .trace
                .windows(2)
                .all(|w| w[1] <= w[0] + 1e-12 * w[0].abs()));
            let kkt = kkt_check(&prob, &pen, l2, fit.beta.view()).unwrap();
            assert!(kkt <= 10.0 * cfg.tol);
        }
    }

    #[test]
    fn mcp_runs_and_is_monotone() {
        let prob = random_problem(50, 12, 4);
        let pen = PenaltySpec::mcp(3.0, 3.0);
        let fit =
            coordinate_descent_fit(&prob, &pen, &SolverConfig::new(1.0).with_trace()).unwrap();
        assert!(fit.converged);
        assert!(fit
            .trace
            .windows(2)
            .all(|w| w[1] <= w[0] + 1e-12 * w[0].abs()));
        // large signals are left unshrunk by MCP
        assert!(fit.beta[0] > 1.5);
    }

    #[test]
    fn zero_column_stays_zero() {
        let x = array![[1.0, 0.0], [2.0, 0.0], [-1.0, 0.0]];
        let y = array![1.0, 2.0, -1.0];
        let prob = RegressionProblem::new(y, x, LaplacianMatrix::zeros(2)).unwrap();
        let fit =
            coordinate_descent_fit(&prob, &PenaltySpec::l1(0.1), &SolverConfig::new(0.0)).unwrap();
        assert_eq!(fit.beta[1], 0.0);
        assert!(fit.converged);
    }

    #[test]
    fn hitting_the_pass_limit_reports_not_converged() {
        let prob = random_problem(30, 10, 5);
        let mut cfg = SolverConfig::new(0.5);
        cfg.max_passes = 1;
        cfg.tol = 1e-12;
        let fit = coordinate_descent_fit(&prob, &PenaltySpec::l1(0.1), &cfg).unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.passes_used, 1);
        assert!(fit.require_converged().is_err());
    }
}
