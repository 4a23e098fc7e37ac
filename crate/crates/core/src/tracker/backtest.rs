use std::path::Path;

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{annual_tracking_error, simple_returns};
use super::panel::PricePanel;
use crate::error::{Error, Result};
use crate::graph::{glasso_fit, laplacian_build, GlassoConfig, LaplacianMatrix};
use crate::numeric::{sample_covariance, standardize_columns};
use crate::selection::{bic_score, target_support_size, SearchOptions};
use crate::solver::{FitResult, RegressionProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindowConfig {
    pub train: usize,
    pub test: usize,
    /// Advance between consecutive windows; equal to `test` gives
    /// non-overlapping evaluation periods.
    pub step: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            train: 100,
            test: 20,
            step: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSplit {
    /// Half-open row ranges into the panel.
    pub train: (usize, usize),
    pub test: (usize, usize),
}

pub fn window_splits(len: usize, cfg: &WindowConfig) -> Result<Vec<WindowSplit>> {
    if cfg.train < 3 || cfg.test < 3 || cfg.step == 0 {
        return Err(Error::InvalidArgument(format!(
            "windows need train ≥ 3, test ≥ 3 and step ≥ 1, got {cfg:?}"
        )));
    }
    let need = cfg.train + cfg.test;
    if len < need {
        return Err(Error::TooShort {
            needed: need,
            got: len,
        });
    }
    Ok((0..=len - need)
        .step_by(cfg.step)
        .map(|s| WindowSplit {
            train: (s, s + cfg.train),
            test: (s + cfg.train, s + need),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressionMode {
    /// Regress index prices on asset prices.
    #[default]
    Prices,
    /// Regress index returns on asset returns.
    Returns,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BacktestConfig {
    pub subset_sizes: Vec<usize>,
    #[serde(default = "default_lambda2_grid")]
    pub lambda2_grid: Vec<f64>,
    /// Graphical-lasso penalty on the training correlation matrix.
    #[serde(default = "default_lambda0")]
    pub lambda0: f64,
    #[serde(default)]
    pub window: WindowConfig,
    #[serde(default)]
    pub mode: RegressionMode,
    /// Absolute index-level error above which a test day is flagged.
    #[serde(default = "default_threshold")]
    pub large_error_threshold: f64,
    #[serde(default = "default_search")]
    pub search: SearchOptions<f64>,
}

fn default_lambda2_grid() -> Vec<f64> {
    vec![0.01, 0.1, 0.5, 1.0, 5.0, 10.0]
}

fn default_lambda0() -> f64 {
    0.1
}

fn default_threshold() -> f64 {
    50.0
}

fn default_search() -> SearchOptions<f64> {
    SearchOptions {
        max_passes: 10_000,
        ..SearchOptions::default()
    }
}

impl BacktestConfig {
    pub fn new(subset_sizes: Vec<usize>) -> Self {
        Self {
            subset_sizes,
            lambda2_grid: default_lambda2_grid(),
            lambda0: default_lambda0(),
            window: WindowConfig::default(),
            mode: RegressionMode::Prices,
            large_error_threshold: default_threshold(),
            search: default_search(),
        }
    }

    fn validate(&self, n_assets: usize) -> Result<()> {
        if self.subset_sizes.is_empty() || self.subset_sizes.iter().any(|&m| m == 0 || m > n_assets)
        {
            return Err(Error::InvalidArgument(format!(
                "subset sizes must lie in [1, {n_assets}], got {:?}",
                self.subset_sizes
            )));
        }
        if self.lambda2_grid.is_empty() || self.lambda2_grid.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidArgument(
                "lambda2 grid must be nonempty and nonnegative".into(),
            ));
        }
        if !(self.lambda0 >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "lambda0 must be nonnegative, got {}",
                self.lambda0
            )));
        }
        Ok(())
    }
}

/// Tracking portfolio of one size in one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeFit {
    pub m: usize,
    /// On the scale of the centered index and standardized assets.
    pub lambda1: f64,
    pub lambda2: f64,
    pub selected_ids: Vec<String>,
    /// Raw-scale coefficients of the selected assets, in `selected_ids` order.
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub predicted_index: Vec<f64>,
    pub realized_index: Vec<f64>,
    pub ate: f64,
    /// Test days (as dates) with `|predicted − realized|` above the threshold.
    pub large_errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub split: WindowSplit,
    pub window_start: String,
    pub window_end: String,
    pub fits: Vec<SizeFit>,
    /// `(m, reason)` for each subset size that could not be fitted.
    pub failures: Vec<(usize, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub windows: Vec<WindowReport>,
    /// `(m, mean ATE over successful windows)`.
    pub ate_by_size: Vec<(usize, f64)>,
    pub large_error_count: usize,
    pub failure_count: usize,
}

struct Design {
    x: Array2<f64>,
    y: Array1<f64>,
}

fn design(panel: &PricePanel, lo: usize, hi: usize, mode: RegressionMode) -> Result<Design> {
    let x = panel.asset_prices.slice(s![lo..hi, ..]);
    let y = panel.index_prices.slice(s![lo..hi]);
    match mode {
        RegressionMode::Prices => Ok(Design {
            x: x.to_owned(),
            y: y.to_owned(),
        }),
        RegressionMode::Returns => {
            let cols = x
                .columns()
                .into_iter()
                .map(simple_returns)
                .collect::<Result<Vec<_>>>()?;
            let xr = Array2::from_shape_fn((hi - lo - 1, cols.len()), |(t, j)| cols[j][t]);
            Ok(Design {
                x: xr,
                y: simple_returns(y)?,
            })
        }
    }
}

fn choose_lambda2(
    yc: ArrayView1<f64>,
    z: ArrayView2<f64>,
    gamma: &LaplacianMatrix<f64>,
    m: usize,
    cfg: &BacktestConfig,
) -> Result<FitResult<f64>> {
    let mut best: Option<(f64, FitResult<f64>)> = None;
    let mut last_err = None;
    for &l2 in &cfg.lambda2_grid {
        let fit = match target_support_size(yc, z, gamma, l2, m, &cfg.search) {
            Ok(f) => f,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let prob = RegressionProblem::new(yc.to_owned(), z.to_owned(), gamma.clone())?;
        let bic = match bic_score(&prob, &fit) {
            Ok(b) => b.bic,
            // an exact fit is as good as it gets
            Err(Error::DegenerateRss) => f64::NEG_INFINITY,
            Err(e) => return Err(e),
        };
        // ties go to the larger λ₂, which comes later in the ascending grid
        if best.as_ref().is_none_or(|(b, _)| bic <= *b) {
            best = Some((bic, fit));
        }
    }
    match (best, last_err) {
        (Some((_, fit)), _) => Ok(fit),
        (None, Some(e)) => Err(e),
        (None, None) => Err(Error::InvalidArgument("empty lambda2 grid".into())),
    }
}

fn run_window(panel: &PricePanel, split: WindowSplit, cfg: &BacktestConfig) -> WindowReport {
    let (tr0, tr1) = split.train;
    let (te0, te1) = split.test;
    let mut report = WindowReport {
        split,
        window_start: panel.dates[te0].to_string(),
        window_end: panel.dates[te1 - 1].to_string(),
        fits: Vec::new(),
        failures: Vec::new(),
    };
    let prepared = (|| -> Result<_> {
        let train = design(panel, tr0, tr1, cfg.mode)?;
        let (z, stdz) = standardize_columns(train.x.view())?;
        let ybar = train.y.mean().unwrap_or(0.0);
        let yc = train.y.mapv(|v| v - ybar);
        // unit-scale response so the solver tolerances are relative
        let yscale = (yc.dot(&yc) / yc.len() as f64).sqrt();
        if !(yscale > 0.0) {
            return Err(Error::InvalidArgument(
                "index is constant over the training window".into(),
            ));
        }
        let yc = yc / yscale;
        let sigma = sample_covariance(z.view())?;
        let est = glasso_fit(sigma.view(), &GlassoConfig::new(cfg.lambda0))?;
        let gamma = laplacian_build(&est)?;
        Ok((z, stdz, ybar, yscale, yc, gamma))
    })();
    let (z, stdz, ybar, yscale, yc, gamma) = match prepared {
        Ok(v) => v,
        Err(e) => {
            report.failures = cfg
                .subset_sizes
                .iter()
                .map(|&m| (m, e.to_string()))
                .collect();
            return report;
        }
    };

    let results: Vec<Result<SizeFit>> = cfg
        .subset_sizes
        .par_iter()
        .map(|&m| {
            let fit = choose_lambda2(yc.view(), z.view(), &gamma, m, cfg)?;
            let beta = stdz.unscale_coefficients(&fit.beta) * yscale;
            let intercept = ybar - stdz.means.dot(&beta);
            let realized_index = panel.index_prices.slice(s![te0..te1]).to_owned();
            let x_test = panel.asset_prices.slice(s![te0..te1, ..]);
            let (predicted_index, predicted_returns) = match cfg.mode {
                RegressionMode::Prices => {
                    let yhat = x_test.dot(&beta) + intercept;
                    if let Some(i) = yhat.iter().position(|v| !(*v > 0.0)) {
                        return Err(Error::NonPositivePrice {
                            asset: "predicted index".into(),
                            date: panel.dates[te0 + i].to_string(),
                        });
                    }
                    let r = simple_returns(yhat.view())?;
                    (yhat, r)
                }
                RegressionMode::Returns => {
                    let test = design(panel, te0, te1, RegressionMode::Returns)?;
                    let r = test.x.dot(&beta) + intercept;
                    // one-step-ahead index level from the previous realized close
                    let mut yhat = Array1::zeros(te1 - te0);
                    yhat[0] = realized_index[0];
                    for t in 1..yhat.len() {
                        yhat[t] = realized_index[t - 1] * (1.0 + r[t - 1]);
                    }
                    (yhat, r)
                }
            };
            let realized_returns = simple_returns(realized_index.view())?;
            let ate = annual_tracking_error(realized_returns.view(), predicted_returns.view())?;
            let large_errors = predicted_index
                .iter()
                .zip(realized_index.iter())
                .enumerate()
                .filter(|(_, (p, r))| (*p - *r).abs() > cfg.large_error_threshold)
                .map(|(t, _)| panel.dates[te0 + t].to_string())
                .collect();
            Ok(SizeFit {
                m,
                lambda1: fit.lambda1 * yscale,
                lambda2: fit.lambda2,
                selected_ids: fit
                    .active_set
                    .iter()
                    .map(|&j| panel.asset_ids[j].clone())
                    .collect(),
                weights: fit.active_set.iter().map(|&j| beta[j]).collect(),
                intercept,
                predicted_index: predicted_index.to_vec(),
                realized_index: realized_index.to_vec(),
                ate,
                large_errors,
            })
        })
        .collect();
    for (m, r) in cfg.subset_sizes.iter().zip(results) {
        match r {
            Ok(f) => report.fits.push(f),
            Err(e) => {
                log::warn!("window {} m={m}: {e}", report.window_start);
                report.failures.push((*m, e.to_string()));
            }
        }
    }
    report
}

/// Rolling backtest: for each window, standardize the training predictors,
/// estimate the graph on them, fit a tracking portfolio for every subset size
/// (λ₂ by BIC) and evaluate it on the following test period. Only training
/// rows enter standardization, the graph and tuning.
pub fn run_backtest(panel: &PricePanel, cfg: &BacktestConfig) -> Result<BacktestReport> {
    panel.validate()?;
    cfg.validate(panel.n_assets())?;
    let splits = window_splits(panel.len(), &cfg.window)?;
    let windows: Vec<WindowReport> = splits
        .par_iter()
        .map(|&sp| run_window(panel, sp, cfg))
        .collect();
    let ate_by_size = cfg
        .subset_sizes
        .iter()
        .map(|&m| {
            let v: Vec<f64> = windows
                .iter()
                .flat_map(|w| w.fits.iter().filter(|f| f.m == m).map(|f| f.ate))
                .collect();
            let mean = if v.is_empty() {
                f64::NAN
            } else {
                v.iter().sum::<f64>() / v.len() as f64
            };
            (m, mean)
        })
        .collect();
    Ok(BacktestReport {
        large_error_count: windows
            .iter()
            .flat_map(|w| w.fits.iter().map(|f| f.large_errors.len()))
            .sum(),
        failure_count: windows.iter().map(|w| w.failures.len()).sum(),
        ate_by_size,
        windows,
    })
}

/// Columns `window_start,window_end,m,lambda1,lambda2,ate,selected_ids`,
/// ids joined by `|`.
pub fn write_window_csv(path: &Path, report: &BacktestReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "window_start",
        "window_end",
        "m",
        "lambda1",
        "lambda2",
        "ate",
        "selected_ids",
    ])?;
    for win in &report.windows {
        for f in &win.fits {
            w.write_record([
                win.window_start.clone(),
                win.window_end.clone(),
                f.m.to_string(),
                f.lambda1.to_string(),
                f.lambda2.to_string(),
                f.ate.to_string(),
                f.selected_ids.join("|"),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
