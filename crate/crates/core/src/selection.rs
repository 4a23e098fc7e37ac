//! Tuning-parameter selection: BIC grid search over `(λ₀, λ₁, λ₂)` and a
//! λ₁ search that hits a target support size.

use ndarray::{ArrayView1, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    adjacency_from_correlation, default_lambda0_grid, fisher_threshold, glasso_fit,
    laplacian_build, AdjacencyMeasure, GlassoConfig, LaplacianMatrix, PrecisionEstimate,
};
use crate::numeric::{covariance_to_correlation, log_space, max_abs_offdiag, sample_covariance};
use crate::scalar::Real;
use crate::solver::{
    coordinate_descent_fit, BetaInit, FitResult, PenaltySpec, RegressionProblem, SolverConfig,
};

/// BIC of one fit: `n·log(rss/n) + df·log(n)` with `df = |active set|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BicScore<T> {
    pub bic: T,
    pub df: usize,
    pub rss: T,
}

pub fn bic_score<T: Real>(prob: &RegressionProblem<T>, fit: &FitResult<T>) -> Result<BicScore<T>> {
    let r = prob.residual(fit.beta.view());
    let rss = r.dot(&r);
    bic_from_rss(prob.n(), rss, fit.support_size())
}

pub fn bic_from_rss<T: Real>(n: usize, rss: T, df: usize) -> Result<BicScore<T>> {
    if !(rss > T::zero()) {
        return Err(Error::DegenerateRss);
    }
    let nf = T::of_usize(n);
    Ok(BicScore {
        bic: nf * (rss / nf).ln() + T::of_usize(df) * nf.ln(),
        df,
        rss,
    })
}

/// Explicit, ascending grids of tuning parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningGrid<T> {
    pub lambda0: Vec<T>,
    pub lambda1: Vec<T>,
    pub lambda2: Vec<T>,
}

impl<T: Real> TuningGrid<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, g) in [
            ("lambda0", &self.lambda0),
            ("lambda1", &self.lambda1),
            ("lambda2", &self.lambda2),
        ] {
            if g.is_empty() {
                return Err(Error::InvalidArgument(format!("{name} grid is empty")));
            }
            if g.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} grid must hold finite nonnegative values"
                )));
            }
            if g.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::InvalidArgument(format!(
                    "{name} grid must be strictly ascending"
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.lambda0.len() * self.lambda1.len() * self.lambda2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Default grids for standardized data: λ₀ from [`default_lambda0_grid`],
    /// 30 log-spaced λ₁ in `[0.01, 1]·‖Xᵀy‖_∞`, λ₂ ∈ {0.01, 0.1, 0.5, 1, 5, 10}.
    pub fn default_for(y: ArrayView1<T>, x: ArrayView2<T>) -> Result<Self> {
        GridSpec::default().resolve(y, x)
    }
}

/// One axis of a grid, either literal values or relative to a data scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridAxis {
    Values(Vec<f64>),
    /// `count` log-spaced multiples in `[lo, hi]` of the axis scale
    /// (`max|offdiag Σ̂|` for λ₀, `‖Xᵀy‖_∞` for λ₁, 1 for λ₂).
    Relative {
        lo: f64,
        hi: f64,
        count: usize,
    },
}

impl GridAxis {
    fn resolve<T: Real>(&self, scale: T) -> Vec<T> {
        match self {
            GridAxis::Values(v) => v.iter().map(|x| T::of(*x)).collect(),
            GridAxis::Relative { lo, hi, count } => {
                log_space(T::of(*lo) * scale, T::of(*hi) * scale, *count)
            }
        }
    }
}

/// Data-independent description of a [`TuningGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub lambda0: GridAxis,
    pub lambda1: GridAxis,
    pub lambda2: GridAxis,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            lambda0: GridAxis::Relative {
                lo: 0.01,
                hi: 1.0,
                count: 10,
            },
            lambda1: GridAxis::Relative {
                lo: 0.01,
                hi: 1.0,
                count: 30,
            },
            lambda2: GridAxis::Values(vec![0.01, 0.1, 0.5, 1.0, 5.0, 10.0]),
        }
    }
}

impl GridSpec {
    pub fn resolve<T: Real>(&self, y: ArrayView1<T>, x: ArrayView2<T>) -> Result<TuningGrid<T>> {
        let lambda1_scale = x.t().dot(&y).iter().fold(T::zero(), |a, v| a.max(v.abs()));
        let lambda0 = match &self.lambda0 {
            GridAxis::Relative { lo, hi, count } if *lo == 0.01 && *hi == 1.0 && *count == 10 => {
                default_lambda0_grid(sample_covariance(x)?.view())
            }
            axis => {
                let scale = if matches!(axis, GridAxis::Relative { .. }) {
                    max_abs_offdiag(sample_covariance(x)?.view())
                } else {
                    T::one()
                };
                axis.resolve(scale)
            }
        };
        let grid = TuningGrid {
            lambda0,
            lambda1: self.lambda1.resolve(lambda1_scale),
            lambda2: self.lambda2.resolve(T::one()),
        };
        grid.validate()?;
        Ok(grid)
    }
}

/// How the penalty kernel is built for each grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GraphMethod {
    /// Graphical lasso at each λ₀ of the grid, Laplacian `D̂ − Θ̂`.
    Glasso {
        #[serde(default)]
        penalize_diagonal: bool,
    },
    /// Correlation adjacency (λ₀ axis unused). N1/N2 threshold from
    /// [`fisher_threshold`] at level `alpha`; N3–N5 use `power`.
    Adjacency {
        measure: AdjacencyMeasure,
        #[serde(default = "default_power")]
        power: f64,
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    /// `Γ = I`: naive elastic net.
    Identity,
    /// `Γ = 0`: plain lasso when paired with λ₂ = 0.
    Empty,
}

fn default_power() -> f64 {
    1.0
}

fn default_alpha() -> f64 {
    0.05
}

impl GraphMethod {
    pub fn uses_lambda0(&self) -> bool {
        matches!(self, GraphMethod::Glasso { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    deny_unknown_fields,
    default,
    bound(deserialize = "T: Real + Deserialize<'de>")
)]
pub struct SearchOptions<T> {
    pub tol: T,
    pub max_passes: usize,
    pub glasso_tol: T,
    pub glasso_max_sweeps: usize,
}

impl<T: Real> Default for SearchOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::of(1e-4),
            max_passes: 1000,
            glasso_tol: T::of(1e-5),
            glasso_max_sweeps: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BicRecord<T> {
    pub lambda0: T,
    pub lambda1: T,
    pub lambda2: T,
    pub df: usize,
    pub rss: T,
    pub bic: T,
    /// Selection score; equals `bic` unless a custom scorer was used.
    pub score: T,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport<T> {
    /// `(λ₀, λ₁, λ₂)` of the selected cell.
    pub best: (T, T, T),
    pub best_index: usize,
    /// One row per grid cell, ordered by λ₀, then λ₁, then λ₂.
    pub bic_table: Vec<BicRecord<T>>,
    pub fit: FitResult<T>,
    pub precision: Option<PrecisionEstimate<T>>,
    pub laplacian: LaplacianMatrix<T>,
    /// Warm-started λ₁ chains along which the support grew as λ₁ increased.
    pub path_violations: usize,
}

/// SLS-GLE selection by BIC with the graphical-lasso graph.
pub fn grid_search<T: Real>(
    y: ArrayView1<T>,
    x: ArrayView2<T>,
    grid: &TuningGrid<T>,
) -> Result<SelectionReport<T>> {
    grid_search_with(
        y,
        x,
        grid,
        &GraphMethod::Glasso {
            penalize_diagonal: false,
        },
        &SearchOptions::default(),
    )
}

pub fn grid_search_with<T: Real>(
    y: ArrayView1<T>,
    x: ArrayView2<T>,
    grid: &TuningGrid<T>,
    method: &GraphMethod,
    opts: &SearchOptions<T>,
) -> Result<SelectionReport<T>> {
    grid_search_scored(y, x, grid, method, opts, &|_, _, bic: &BicScore<T>| {
        Ok(bic.bic)
    })
}

/// A λ₀ value, the precision estimate behind it (glasso only) and its kernel.
pub type GraphCell<T> = (T, Option<PrecisionEstimate<T>>, LaplacianMatrix<T>);

/// Builds the penalty kernels for every λ₀ the method needs.
pub fn build_graphs<T: Real>(
    x: ArrayView2<T>,
    lambda0_grid: &[T],
    method: &GraphMethod,
    opts: &SearchOptions<T>,
) -> Result<Vec<GraphCell<T>>> {
    let (n, p) = x.dim();
    match method {
        GraphMethod::Glasso { penalize_diagonal } => {
            let sigma = sample_covariance(x)?;
            lambda0_grid
                .par_iter()
                .map(|&l0| {
                    let cfg = GlassoConfig {
                        lambda0: l0,
                        max_sweeps: opts.glasso_max_sweeps,
                        tol: opts.glasso_tol,
                        penalize_diagonal: *penalize_diagonal,
                    };
                    let est = glasso_fit(sigma.view(), &cfg).map_err(|e| Error::Grid {
                        lambda0: l0.as_f64(),
                        lambda1: f64::NAN,
                        lambda2: f64::NAN,
                        source: Box::new(e),
                    })?;
                    let lap = laplacian_build(&est)?;
                    Ok((l0, Some(est), lap))
                })
                .collect()
        }
        GraphMethod::Adjacency {
            measure,
            power,
            alpha,
        } => {
            let r = covariance_to_correlation(sample_covariance(x)?.view())?;
            let threshold = match measure {
                AdjacencyMeasure::N1 | AdjacencyMeasure::N2 => {
                    T::of(fisher_threshold(n, *alpha, p)?)
                }
                _ => T::of(0.5),
            };
            let adj = adjacency_from_correlation(r.view(), *measure, threshold, T::of(*power))?;
            Ok(vec![(T::zero(), None, laplacian_build(&adj)?)])
        }
        GraphMethod::Identity => Ok(vec![(T::zero(), None, LaplacianMatrix::identity(p))]),
        GraphMethod::Empty => Ok(vec![(T::zero(), None, LaplacianMatrix::zeros(p))]),
    }
}

type Scorer<'a, T> =
    dyn Fn(&RegressionProblem<T>, &FitResult<T>, &BicScore<T>) -> Result<T> + Sync + 'a;

/// Grid search with an arbitrary selection score (lower is better).
///
/// Each `(λ₀, λ₂)` pair runs one warm-started chain over λ₁ in descending
/// order; chains run in parallel. Ties in the score go to the larger λ₁,
/// then the larger λ₂, then the larger λ₀.
pub fn grid_search_scored<T: Real>(
    y: ArrayView1<T>,
    x: ArrayView2<T>,
    grid: &TuningGrid<T>,
    method: &GraphMethod,
    opts: &SearchOptions<T>,
    scorer: &Scorer<'_, T>,
) -> Result<SelectionReport<T>> {
    grid.validate()?;
    let lambda0_axis: Vec<T> = if method.uses_lambda0() {
        grid.lambda0.clone()
    } else {
        vec![T::zero()]
    };
    let graphs = build_graphs(x, &lambda0_axis, method, opts)?;
    let problems: Vec<RegressionProblem<T>> = graphs
        .iter()
        .map(|(_, _, lap)| RegressionProblem::new(y.to_owned(), x.to_owned(), lap.clone()))
        .collect::<Result<_>>()?;

    let chains: Vec<(usize, usize)> = (0..graphs.len())
        .flat_map(|g| (0..grid.lambda2.len()).map(move |k| (g, k)))
        .collect();

    type Chain<T> = (Vec<(BicRecord<T>, FitResult<T>)>, bool);
    let results: Vec<Chain<T>> = chains
        .par_iter()
        .map(|&(g, k)| -> Result<Chain<T>> {
            let prob = &problems[g];
            let l0 = graphs[g].0;
            let l2 = grid.lambda2[k];
            let mut out = Vec::with_capacity(grid.lambda1.len());
            let mut init = BetaInit::Marginal;
            let mut prev_df: Option<usize> = None;
            let mut violated = false;
            for &l1 in grid.lambda1.iter().rev() {
                let annotate = |e: Error| Error::Grid {
                    lambda0: l0.as_f64(),
                    lambda1: l1.as_f64(),
                    lambda2: l2.as_f64(),
                    source: Box::new(e),
                };
                let cfg = SolverConfig {
                    lambda2: l2,
                    tol: opts.tol,
                    max_passes: opts.max_passes,
                    init: init.clone(),
                    record_trace: false,
                };
                let fit =
                    coordinate_descent_fit(prob, &PenaltySpec::l1(l1), &cfg).map_err(annotate)?;
                let bic = bic_score(prob, &fit).map_err(annotate)?;
                let score = scorer(prob, &fit, &bic).map_err(annotate)?;
                if let Some(d) = prev_df {
                    if bic.df < d {
                        violated = true;
                    }
                }
                prev_df = Some(bic.df);
                init = BetaInit::Custom(fit.beta.clone());
                out.push((
                    BicRecord {
                        lambda0: l0,
                        lambda1: l1,
                        lambda2: l2,
                        df: bic.df,
                        rss: bic.rss,
                        bic: bic.bic,
                        score,
                        converged: fit.converged,
                    },
                    fit,
                ));
            }
            out.reverse();
            Ok((out, violated))
        })
        .collect::<Result<_>>()?;

    let path_violations = results.iter().filter(|(_, v)| *v).count();
    if path_violations > 0 {
        log::warn!("{path_violations} lambda1 path(s) had support size increase with lambda1");
    }

    // chains are ordered (graph, λ2) with λ1 ascending inside; reorder to (λ0, λ1, λ2)
    let n1 = grid.lambda1.len();
    let n2 = grid.lambda2.len();
    let mut cells: Vec<Option<(BicRecord<T>, FitResult<T>)>> =
        (0..graphs.len() * n1 * n2).map(|_| None).collect();
    for (c, (chain, _)) in results.into_iter().enumerate() {
        let (g, k) = chains[c];
        for (i1, cell) in chain.into_iter().enumerate() {
            cells[(g * n1 + i1) * n2 + k] = Some(cell);
        }
    }
    let cells: Vec<(BicRecord<T>, FitResult<T>)> = cells
        .into_iter()
        .map(|c| c.expect("every cell filled"))
        .collect();

    let best_index = select_best(cells.iter().map(|(r, _)| r))
        .ok_or_else(|| Error::InvalidArgument("no finite score on the grid".into()))?;
    let best_graph = best_index / (n1 * n2);
    let mut table = Vec::with_capacity(cells.len());
    let mut best_fit = None;
    for (i, (rec, fit)) in cells.into_iter().enumerate() {
        if i == best_index {
            best_fit = Some(fit);
        }
        table.push(rec);
    }
    let best_rec = &table[best_index];
    let (_, precision, laplacian) = graphs.into_iter().nth(best_graph).expect("graph exists");
    Ok(SelectionReport {
        best: (best_rec.lambda0, best_rec.lambda1, best_rec.lambda2),
        best_index,
        fit: best_fit.expect("best fit present"),
        precision,
        laplacian,
        bic_table: table,
        path_violations,
    })
}

fn consider<T: Real>(best: &mut Option<FitResult<T>>, m: usize, fit: &FitResult<T>) {
    let s = fit.support_size();
    if s > m {
        return;
    }
    let better = match best {
        None => true,
        Some(b) => s > b.support_size() || (s == b.support_size() && fit.lambda1 < b.lambda1),
    };
    if better {
        *best = Some(fit.clone());
    }
}

fn select_best<'a, T: Real>(records: impl Iterator<Item = &'a BicRecord<T>>) -> Option<usize> {
    let mut best: Option<(usize, &BicRecord<T>)> = None;
    for (i, r) in records.enumerate() {
        if !r.score.is_finite() {
            continue;
        }
        best = match best {
            None => Some((i, r)),
            Some((bi, b)) => {
                let tie_tol = T::of(1e-12) * b.score.abs().max(T::one());
                if r.score < b.score - tie_tol
                    || ((r.score - b.score).abs() <= tie_tol && prefers(r, b))
                {
                    Some((i, r))
                } else {
                    Some((bi, b))
                }
            }
        };
    }
    best.map(|(i, _)| i)
}

fn prefers<T: Real>(a: &BicRecord<T>, b: &BicRecord<T>) -> bool {
    (a.lambda1, a.lambda2, a.lambda0) > (b.lambda1, b.lambda2, b.lambda0)
}

/// Finds the least-shrunk fit with at most `m` active coefficients.
///
/// Targets the boundary `λ₁* = inf{λ₁ : |S(λ₁)| ≤ m}`: λ₁ descends from
/// `‖Xᵀy‖_∞` by decades until the support exceeds `m`, then geometric
/// bisection keeps `|S(hi)| ≤ m < |S(lo)|` for up to 40 steps or until
/// `hi/lo < 1.001`. Returns the evaluated fit whose support size is closest
/// to `m` without exceeding it (smallest λ₁ among equals). Fails with
/// `UnreachableSize` when even `λ₁ = 10⁻⁸‖Xᵀy‖_∞` activates fewer than
/// `m − 2` coefficients.
pub fn target_support_size<T: Real>(
    y: ArrayView1<T>,
    x: ArrayView2<T>,
    gamma: &LaplacianMatrix<T>,
    lambda2: T,
    m: usize,
    opts: &SearchOptions<T>,
) -> Result<FitResult<T>> {
    let p = x.ncols();
    if m == 0 || m > p {
        return Err(Error::InvalidArgument(format!(
            "target support size must lie in [1, {p}], got {m}"
        )));
    }
    let prob = RegressionProblem::new(y.to_owned(), x.to_owned(), gamma.clone())?;
    let lmax = prob.lambda1_max();
    if !(lmax > T::zero()) {
        return Err(Error::UnreachableSize {
            target: m,
            reached: 0,
        });
    }
    let fit_at = |l1: T, init: BetaInit<T>| -> Result<FitResult<T>> {
        let cfg = SolverConfig {
            lambda2,
            tol: opts.tol,
            max_passes: opts.max_passes,
            init,
            record_trace: false,
        };
        coordinate_descent_fit(&prob, &PenaltySpec::l1(l1), &cfg)
    };

    let mut best: Option<FitResult<T>> = None;
    let mut hi = lmax;
    let hi_fit = fit_at(hi, BetaInit::Zeros)?;
    consider(&mut best, m, &hi_fit);
    let mut warm = hi_fit.beta;
    let mut reached = hi_fit.active_set.len();
    let mut lo = None;
    let ten = T::of(10.0);
    for _ in 0..8 {
        let l1 = hi / ten;
        let fit = fit_at(l1, BetaInit::Custom(warm.clone()))?;
        consider(&mut best, m, &fit);
        reached = fit.support_size();
        if reached > m {
            lo = Some(l1);
            break;
        }
        hi = l1;
        warm = fit.beta;
    }
    match lo {
        None if reached + 2 < m => {
            return Err(Error::UnreachableSize { target: m, reached });
        }
        None => {}
        Some(mut lo) => {
            for _ in 0..40 {
                if hi / lo < T::of(1.001) {
                    break;
                }
                let mid = (lo * hi).sqrt();
                let fit = fit_at(mid, BetaInit::Custom(warm.clone()))?;
                consider(&mut best, m, &fit);
                if fit.support_size() <= m {
                    hi = mid;
                    warm = fit.beta;
                } else {
                    lo = mid;
                }
            }
        }
    }
    let best = best.expect("the lambda1_max fit always qualifies");
    if best.support_size() + 2 < m {
        log::warn!(
            "target support {m}: closest admissible fit has {} active coefficients",
            best.support_size()
        );
    }
    Ok(best)
}
