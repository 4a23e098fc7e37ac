use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use ndarray::{Array1, ArrayView1, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::{generate_dataset, generate_test_set, ScenarioSpec};
use crate::error::{Error, Result};
use crate::graph::AdjacencyMeasure;
use crate::numeric::standardize_columns;
use crate::sampling::RngSeed;
use crate::selection::{grid_search_scored, GraphMethod, GridAxis, GridSpec, SearchOptions};

/// Estimators compared in a study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    SlsGle,
    SlsN(u8),
    ElasticNet,
    Lasso,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::SlsGle,
        Method::SlsN(1),
        Method::SlsN(2),
        Method::SlsN(3),
        Method::SlsN(4),
        Method::SlsN(5),
        Method::ElasticNet,
        Method::Lasso,
    ];

    pub fn graph(&self) -> Result<GraphMethod> {
        Ok(match self {
            Method::SlsGle => GraphMethod::Glasso {
                penalize_diagonal: false,
            },
            Method::SlsN(k) => GraphMethod::Adjacency {
                measure: AdjacencyMeasure::from_index(*k).ok_or_else(|| {
                    Error::InvalidSpec(format!("adjacency measure N{k} does not exist"))
                })?,
                power: 1.0,
                alpha: 0.05,
            },
            Method::ElasticNet => GraphMethod::Identity,
            Method::Lasso => GraphMethod::Empty,
        })
    }

    /// Lasso ignores the configured λ₂ axis and uses `{0}`.
    pub fn grid(&self, base: &GridSpec) -> GridSpec {
        match self {
            Method::Lasso => GridSpec {
                lambda2: GridAxis::Values(vec![0.0]),
                ..base.clone()
            },
            _ => base.clone(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::SlsGle => write!(f, "SLS-GLE"),
            Method::SlsN(k) => write!(f, "SLS-N{k}"),
            Method::ElasticNet => write!(f, "ElasticNet"),
            Method::Lasso => write!(f, "Lasso"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "SLS-GLE" => Ok(Method::SlsGle),
            "ElasticNet" => Ok(Method::ElasticNet),
            "Lasso" => Ok(Method::Lasso),
            _ => match s.strip_prefix("SLS-N").and_then(|k| k.parse::<u8>().ok()) {
                Some(k @ 1..=5) => Ok(Method::SlsN(k)),
                _ => Err(Error::InvalidSpec(format!(
                    "unknown method {s:?}; expected SLS-GLE, SLS-N1..SLS-N5, ElasticNet or Lasso"
                ))),
            },
        }
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    /// Minimum BIC over the grid.
    #[default]
    Bic,
    /// Minimum `‖β̂ − β‖₂` over the grid (needs the true coefficients).
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MseKind {
    /// `(1/n_test)‖y_test − X_test β̂‖²` on a fresh draw.
    #[default]
    Prediction,
    /// `‖β̂ − β‖² / p`.
    Estimation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    /// Template scenario; `n` and `seed` are replaced per cell.
    pub base: ScenarioSpec,
    pub n_list: Vec<usize>,
    pub methods: Vec<Method>,
    pub replications: usize,
    pub seed: RngSeed,
    pub grid: GridSpec,
    pub selection: SelectionRule,
    pub mse: MseKind,
    pub n_test: usize,
    pub search: SearchOptions<f64>,
    /// Wall-clock timings make the raw output nondeterministic; off by default.
    pub record_runtime: bool,
}

impl StudyConfig {
    pub fn new(
        base: ScenarioSpec,
        n_list: Vec<usize>,
        methods: Vec<Method>,
        replications: usize,
        seed: RngSeed,
    ) -> Self {
        Self {
            base,
            n_list,
            methods,
            replications,
            seed,
            grid: GridSpec::default(),
            selection: SelectionRule::Bic,
            mse: MseKind::Prediction,
            n_test: 200,
            search: SearchOptions::default(),
            record_runtime: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationResult {
    pub method: Method,
    pub n: usize,
    pub replicate: usize,
    pub l2_error: f64,
    pub mse: f64,
    pub support_recovered: bool,
    pub runtime_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub method: Method,
    pub n: usize,
    pub replicate: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StudyOutcome {
    /// Sorted by method, then `n`, then replicate.
    pub results: Vec<ReplicationResult>,
    pub failures: Vec<CellFailure>,
}

/// `(‖β̂ − β‖₂, (1/n_test)‖y_test − X_test β̂‖²)`.
pub fn compute_metrics(
    beta_hat: ArrayView1<f64>,
    beta_true: ArrayView1<f64>,
    y_test: ArrayView1<f64>,
    x_test: ArrayView2<f64>,
) -> Result<(f64, f64)> {
    if beta_hat.len() != beta_true.len()
        || x_test.ncols() != beta_hat.len()
        || x_test.nrows() != y_test.len()
    {
        return Err(Error::DimensionMismatch(format!(
            "beta_hat {}, beta_true {}, X_test {:?}, y_test {}",
            beta_hat.len(),
            beta_true.len(),
            x_test.dim(),
            y_test.len()
        )));
    }
    if y_test.is_empty() {
        return Err(Error::DimensionMismatch("empty test set".into()));
    }
    let d = &beta_hat - &beta_true;
    let r = &y_test - &x_test.dot(&beta_hat);
    Ok((d.dot(&d).sqrt(), r.dot(&r) / y_test.len() as f64))
}

fn cell_seed(master: RngSeed, n: usize, replicate: usize) -> RngSeed {
    master.derive(replicate as u64).derive(n as u64)
}

struct Cell {
    beta_hat: Array1<f64>,
    runtime_ms: u64,
}

fn fit_cell(
    cfg: &StudyConfig,
    method: Method,
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    beta: &Array1<f64>,
) -> Result<Cell> {
    let start = Instant::now();
    let (z, stdz) = standardize_columns(x)?;
    let ybar = y.mean().unwrap_or(0.0);
    let yc = y.mapv(|v| v - ybar);
    let grid = method.grid(&cfg.grid).resolve(yc.view(), z.view())?;
    let graph = method.graph()?;
    let report = match cfg.selection {
        SelectionRule::Bic => grid_search_scored(
            yc.view(),
            z.view(),
            &grid,
            &graph,
            &cfg.search,
            &|_, _, b| Ok(b.bic),
        )?,
        SelectionRule::Oracle => grid_search_scored(
            yc.view(),
            z.view(),
            &grid,
            &graph,
            &cfg.search,
            &|_, fit, _| {
                let d = stdz.unscale_coefficients(&fit.beta) - beta;
                Ok(d.dot(&d).sqrt())
            },
        )?,
    };
    Ok(Cell {
        beta_hat: stdz.unscale_coefficients(&report.fit.beta),
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}

/// Runs every `(method, n, replicate)` cell. Methods share each dataset; a
/// failing cell is recorded and the study continues.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyOutcome> {
    if cfg.replications == 0 {
        return Err(Error::InvalidSpec("replications must be at least 1".into()));
    }
    if cfg.n_list.is_empty() || cfg.methods.is_empty() {
        return Err(Error::InvalidSpec(
            "n_list and methods must be non-empty".into(),
        ));
    }
    if cfg.n_test == 0 {
        return Err(Error::InvalidSpec("n_test must be positive".into()));
    }
    cfg.base.validate()?;

    let datasets: Vec<(usize, usize)> = cfg
        .n_list
        .iter()
        .flat_map(|&n| (0..cfg.replications).map(move |r| (n, r)))
        .collect();

    let cells: Vec<Vec<std::result::Result<ReplicationResult, CellFailure>>> = datasets
        .par_iter()
        .map(|&(n, replicate)| {
            let seed = cell_seed(cfg.seed, n, replicate);
            let spec = ScenarioSpec {
                n,
                seed,
                ..cfg.base.clone()
            };
            let fail = |method: Method, e: Error| CellFailure {
                method,
                n,
                replicate,
                message: e.to_string(),
            };
            let data = generate_dataset(&spec).and_then(|d| {
                Ok((
                    generate_test_set(&spec, cfg.n_test, seed.derive(0x7e57))?,
                    d,
                ))
            });
            let (test, train) = match data {
                Ok(v) => v,
                Err(e) => {
                    let msg = e.to_string();
                    return cfg
                        .methods
                        .iter()
                        .map(|&m| Err(fail(m, Error::InvalidSpec(msg.clone()))))
                        .collect();
                }
            };
            cfg.methods
                .par_iter()
                .map(|&method| {
                    let cell = fit_cell(cfg, method, train.x.view(), train.y.view(), &train.beta)
                        .map_err(|e| fail(method, e))?;
                    let (l2_error, pred_mse) = compute_metrics(
                        cell.beta_hat.view(),
                        train.beta.view(),
                        test.y.view(),
                        test.x.view(),
                    )
                    .map_err(|e| fail(method, e))?;
                    let mse = match cfg.mse {
                        MseKind::Prediction => pred_mse,
                        MseKind::Estimation => l2_error * l2_error / spec.p as f64,
                    };
                    let support_recovered = cell
                        .beta_hat
                        .iter()
                        .zip(train.beta.iter())
                        .all(|(a, b)| (*a != 0.0) == (*b != 0.0));
                    Ok(ReplicationResult {
                        method,
                        n,
                        replicate,
                        l2_error,
                        mse,
                        support_recovered,
                        runtime_ms: if cfg.record_runtime {
                            cell.runtime_ms
                        } else {
                            0
                        },
                    })
                })
                .collect()
        })
        .collect();

    let mut out = StudyOutcome::default();
    for r in cells.into_iter().flatten() {
        match r {
            Ok(v) => out.results.push(v),
            Err(f) => {
                log::warn!(
                    "cell {} n={} rep={} failed: {}",
                    f.method,
                    f.n,
                    f.replicate,
                    f.message
                );
                out.failures.push(f)
            }
        }
    }
    out.results.sort_by_key(|r| (r.method, r.n, r.replicate));
    out.failures.sort_by_key(|f| (f.method, f.n, f.replicate));
    Ok(out)
}

/// Mean and standard error per `(method, n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub method: Method,
    pub n: usize,
    pub replicates: usize,
    pub l2_mean: f64,
    pub l2_se: f64,
    pub mse_mean: f64,
    pub mse_se: f64,
    pub support_rate: f64,
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let k = v.len() as f64;
    let mean = v.iter().sum::<f64>() / k;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

pub fn summarize(results: &[ReplicationResult]) -> Vec<MetricsSummary> {
    let mut keys: Vec<(Method, usize)> = results.iter().map(|r| (r.method, r.n)).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(method, n)| {
            let rows: Vec<&ReplicationResult> = results
                .iter()
                .filter(|r| r.method == method && r.n == n)
                .collect();
            let l2: Vec<f64> = rows.iter().map(|r| r.l2_error).collect();
            let mse: Vec<f64> = rows.iter().map(|r| r.mse).collect();
            let (l2_mean, l2_se) = mean_se(&l2);
            let (mse_mean, mse_se) = mean_se(&mse);
            MetricsSummary {
                method,
                n,
                replicates: rows.len(),
                l2_mean,
                l2_se,
                mse_mean,
                mse_se,
                support_rate: rows.iter().filter(|r| r.support_recovered).count() as f64
                    / rows.len() as f64,
            }
        })
        .collect()
}

fn write_rows<S: Serialize>(path: &Path, rows: &[S], header: &[&str]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(header)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `method,n,replicate,l2_error,mse,support_recovered,runtime_ms`.
pub fn write_raw_csv(path: &Path, results: &[ReplicationResult]) -> Result<()> {
    write_rows(
        path,
        results,
        &[
            "method",
            "n",
            "replicate",
            "l2_error",
            "mse",
            "support_recovered",
            "runtime_ms",
        ],
    )
}

/// Columns `method,n,replicates,l2_mean,l2_se,mse_mean,mse_se,support_rate`.
pub fn write_summary_csv(path: &Path, summary: &[MetricsSummary]) -> Result<()> {
    write_rows(
        path,
        summary,
        &[
            "method",
            "n",
            "replicates",
            "l2_mean",
            "l2_se",
            "mse_mean",
            "mse_se",
            "support_rate",
        ],
    )
}
