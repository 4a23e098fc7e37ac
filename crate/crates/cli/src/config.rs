//! Run configuration files (TOML, `schema_version = 1`).

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use chrono::NaiveDate;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use slsgle::selection::{GraphMethod, GridSpec, SearchOptions};
use slsgle::sim::{Method, MseKind, ScenarioId, SelectionRule};
use slsgle::tracker::{BacktestConfig, LoadConfig, SyntheticPanelSpec};
use slsgle::RngSeed;

pub const SCHEMA_VERSION: u32 = 1;

/// Fields every config file shares.
pub trait RunConfig: DeserializeOwned {
    fn schema_version(&self) -> u32;
    fn seed(&self) -> Option<u64> {
        None
    }
    fn output_dir(&self) -> Option<&Path>;
}

/// Reads and validates a config; errors name the offending key path.
pub fn load<C: RunConfig>(path: &Path) -> Result<C> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse(&text).with_context(|| format!("invalid config {}", path.display()))
}

pub fn parse<C: RunConfig>(text: &str) -> Result<C> {
    let de = toml::Deserializer::parse(text).map_err(|e| anyhow!("{}", e.message()))?;
    let cfg: C = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        anyhow!("at `{path}`: {}", e.inner().message())
    })?;
    if cfg.schema_version() != SCHEMA_VERSION {
        bail!(
            "at `schema_version`: expected {SCHEMA_VERSION}, got {}",
            cfg.schema_version()
        );
    }
    Ok(cfg)
}

/// Resolves `p` against the directory holding the config file.
pub fn relative_to(config: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        return p.to_path_buf();
    }
    config.parent().unwrap_or(Path::new(".")).join(p)
}

macro_rules! run_config {
    ($ty:ty, seeded) => {
        impl RunConfig for $ty {
            fn schema_version(&self) -> u32 {
                self.schema_version
            }
            fn seed(&self) -> Option<u64> {
                self.seed
            }
            fn output_dir(&self) -> Option<&Path> {
                self.output_dir.as_deref()
            }
        }
    };
    ($ty:ty) => {
        impl RunConfig for $ty {
            fn schema_version(&self) -> u32 {
                self.schema_version
            }
            fn output_dir(&self) -> Option<&Path> {
                self.output_dir.as_deref()
            }
        }
    };
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub schema_version: u32,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub scenario: ScenarioSection,
    pub study: StudySection,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub search: SearchOptions<f64>,
}
run_config!(SimulateConfig, seeded);

/// `p`, `q`, `beta_value` and `noise_sd` default to the desk-scale design.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub id: ScenarioId,
    pub p: Option<usize>,
    pub q: Option<usize>,
    pub beta_value: Option<f64>,
    pub noise_sd: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    pub n: Vec<usize>,
    #[serde(default = "all_methods")]
    pub methods: Vec<Method>,
    pub replications: usize,
    #[serde(default)]
    pub selection: SelectionRule,
    #[serde(default)]
    pub mse: MseKind,
    #[serde(default = "default_n_test")]
    pub n_test: usize,
    #[serde(default)]
    pub record_runtime: bool,
}

fn all_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_n_test() -> usize {
    200
}

/// A regression data set: CSV with a header row, one response column and
/// every other column a predictor.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub path: PathBuf,
    #[serde(default = "default_response")]
    pub response: String,
    /// Center the response and scale predictors to `(1/n)Σx² = 1` before fitting.
    #[serde(default)]
    pub standardize: bool,
}

fn default_response() -> String {
    "y".into()
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PenaltyChoice {
    #[default]
    L1,
    Mcp {
        gamma: f64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub tol: f64,
    pub max_passes: usize,
    pub glasso_tol: f64,
    pub glasso_max_sweeps: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SearchOptions::<f64>::default();
        Self {
            tol: s.tol,
            max_passes: s.max_passes,
            glasso_tol: s.glasso_tol,
            glasso_max_sweeps: s.glasso_max_sweeps,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub schema_version: u32,
    pub output_dir: Option<PathBuf>,
    pub data: DataSection,
    #[serde(default = "empty_graph")]
    pub graph: GraphMethod,
    /// Required when `graph.type = "glasso"`.
    pub lambda0: Option<f64>,
    pub lambda1: f64,
    #[serde(default)]
    pub lambda2: f64,
    #[serde(default)]
    pub penalty: PenaltyChoice,
    #[serde(default)]
    pub solver: SolverSection,
}
run_config!(FitConfig);

fn empty_graph() -> GraphMethod {
    GraphMethod::Empty
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuneConfig {
    pub schema_version: u32,
    pub output_dir: Option<PathBuf>,
    pub data: DataSection,
    #[serde(default = "glasso_graph")]
    pub graph: GraphMethod,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub search: SearchOptions<f64>,
}
run_config!(TuneConfig);

fn glasso_graph() -> GraphMethod {
    GraphMethod::Glasso {
        penalize_diagonal: false,
    }
}

/// Exactly one of `prices` and `[synthetic]` must be given.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BacktestFile {
    pub schema_version: u32,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub prices: Option<PathBuf>,
    #[serde(default)]
    pub load: LoadConfig,
    pub synthetic: Option<SyntheticSection>,
    pub backtest: BacktestConfig,
}
run_config!(BacktestFile, seeded);

/// [`SyntheticPanelSpec`] without the seed, which comes from the run.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSection {
    pub n_assets: usize,
    pub n_days: usize,
    pub n_factors: usize,
    pub active: usize,
    pub factor_sd: f64,
    pub idio_sd: f64,
    pub noise_sd: f64,
    pub persistence: f64,
    pub start: NaiveDate,
}

impl Default for SyntheticSection {
    fn default() -> Self {
        let d = SyntheticPanelSpec::default();
        Self {
            n_assets: d.n_assets,
            n_days: d.n_days,
            n_factors: d.n_factors,
            active: d.active,
            factor_sd: d.factor_sd,
            idio_sd: d.idio_sd,
            noise_sd: d.noise_sd,
            persistence: d.persistence,
            start: d.start,
        }
    }
}

impl SyntheticSection {
    pub fn spec(&self, seed: RngSeed) -> SyntheticPanelSpec {
        SyntheticPanelSpec {
            n_assets: self.n_assets,
            n_days: self.n_days,
            n_factors: self.n_factors,
            active: self.active,
            factor_sd: self.factor_sd,
            idio_sd: self.idio_sd,
            noise_sd: self.noise_sd,
            persistence: self.persistence,
            start: self.start,
            seed,
        }
    }
}
