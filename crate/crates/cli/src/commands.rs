use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::{info, warn};
use ndarray::{Array1, Array2};
use serde::Serialize;
use slsgle::numeric::{standardize_columns, Standardization};
use slsgle::selection::{build_graphs, grid_search_with, SearchOptions};
use slsgle::sim::{
    run_study, summarize, write_raw_csv, write_summary_csv, ScenarioSpec, StudyConfig,
};
use slsgle::solver::{coordinate_descent_fit, PenaltySpec, RegressionProblem, SolverConfig};
use slsgle::tracker::{load_prices, run_backtest, synthetic_panel, write_window_csv};
use slsgle::RngSeed;

use crate::config::{
    relative_to, BacktestFile, DataSection, FitConfig, PenaltyChoice, SimulateConfig, TuneConfig,
};
use crate::data::read_regression_csv;

/// Whether every cell, window or fit of a run succeeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Complete,
    Partial,
}

pub struct Run<'a, C> {
    pub config: C,
    pub config_path: &'a Path,
    pub seed: RngSeed,
    pub output_dir: PathBuf,
}

impl<C> Run<'_, C> {
    fn out(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut f =
        fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    info!("wrote {}", path.display());
    Ok(())
}

pub fn simulate(run: &Run<SimulateConfig>) -> Result<Outcome> {
    let c = &run.config;
    let Some(&n0) = c.study.n.first() else {
        bail!("study.n must list at least one sample size");
    };
    let desk = ScenarioSpec::desk(c.scenario.id, n0, run.seed);
    let base = ScenarioSpec {
        p: c.scenario.p.unwrap_or(desk.p),
        q: c.scenario.q.unwrap_or(desk.q),
        beta_value: c.scenario.beta_value.unwrap_or(desk.beta_value),
        noise_sd: c.scenario.noise_sd.unwrap_or(desk.noise_sd),
        ..desk
    };
    base.validate()?;
    let mut study = StudyConfig::new(
        base,
        c.study.n.clone(),
        c.study.methods.clone(),
        c.study.replications,
        run.seed,
    );
    study.grid = c.grid.clone();
    study.selection = c.study.selection;
    study.mse = c.study.mse;
    study.n_test = c.study.n_test;
    study.search = c.search.clone();
    study.record_runtime = c.study.record_runtime;

    let outcome = run_study(&study)?;
    write_raw_csv(&run.out("raw.csv"), &outcome.results)?;
    write_summary_csv(&run.out("summary.csv"), &summarize(&outcome.results))?;
    info!(
        "wrote raw.csv and summary.csv to {}",
        run.output_dir.display()
    );
    if outcome.failures.is_empty() {
        return Ok(Outcome::Complete);
    }
    let path = run.out("failures.csv");
    let mut w = csv::Writer::from_path(&path)?;
    for f in &outcome.failures {
        warn!("{} n={} rep={}: {}", f.method, f.n, f.replicate, f.message);
        w.serialize(f)?;
    }
    w.flush()?;
    Ok(Outcome::Partial)
}

struct Prepared {
    y: Array1<f64>,
    x: Array2<f64>,
    names: Vec<String>,
    /// Present when the data were standardized; `y` was centered at `ybar`.
    scaling: Option<(Standardization<f64>, f64)>,
}

fn prepare(config_path: &Path, data: &DataSection) -> Result<Prepared> {
    let d = read_regression_csv(&relative_to(config_path, &data.path), &data.response)?;
    if !data.standardize {
        return Ok(Prepared {
            y: d.y,
            x: d.x,
            names: d.names,
            scaling: None,
        });
    }
    let (x, st) = standardize_columns(d.x.view())?;
    let ybar = d.y.mean().unwrap_or(0.0);
    Ok(Prepared {
        y: &d.y - ybar,
        x,
        names: d.names,
        scaling: Some((st, ybar)),
    })
}

/// Intercept and raw-scale coefficients, one row per term.
fn write_coefficients(path: &Path, data: &Prepared, beta: &Array1<f64>) -> Result<()> {
    let (raw, intercept) = match &data.scaling {
        Some((st, ybar)) => {
            let raw = st.unscale_coefficients(beta);
            let b0 = ybar - st.means.dot(&raw);
            (raw, b0)
        }
        None => (beta.clone(), 0.0),
    };
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["term", "estimate"])?;
    w.write_record(["(intercept)".to_string(), intercept.to_string()])?;
    for (name, b) in data.names.iter().zip(raw.iter()) {
        w.write_record([name.clone(), b.to_string()])?;
    }
    w.flush()?;
    info!("wrote {}", path.display());
    Ok(())
}

pub fn fit(run: &Run<FitConfig>) -> Result<Outcome> {
    let c = &run.config;
    let data = prepare(run.config_path, &c.data)?;
    let opts = SearchOptions {
        tol: c.solver.tol,
        max_passes: c.solver.max_passes,
        glasso_tol: c.solver.glasso_tol,
        glasso_max_sweeps: c.solver.glasso_max_sweeps,
    };
    let lambda0 = match (c.graph.uses_lambda0(), c.lambda0) {
        (true, None) => bail!("graph type glasso needs `lambda0`"),
        (_, l0) => l0.unwrap_or(0.0),
    };
    let (_, _, gamma) = build_graphs(data.x.view(), &[lambda0], &c.graph, &opts)?
        .pop()
        .context("no graph was built")?;
    let prob = RegressionProblem::new(data.y.clone(), data.x.clone(), gamma)?;
    let penalty = match c.penalty {
        PenaltyChoice::L1 => PenaltySpec::l1(c.lambda1),
        PenaltyChoice::Mcp { gamma } => PenaltySpec::mcp(c.lambda1, gamma),
    };
    let solver = SolverConfig {
        tol: opts.tol,
        max_passes: opts.max_passes,
        ..SolverConfig::new(c.lambda2)
    };
    let fit = coordinate_descent_fit(&prob, &penalty, &solver)?;
    write_json(&run.out("fit.json"), &fit.summary())?;
    write_coefficients(&run.out("coefficients.csv"), &data, &fit.beta)?;
    if fit.converged {
        Ok(Outcome::Complete)
    } else {
        warn!(
            "coordinate descent stopped after {} passes without converging",
            fit.passes_used
        );
        Ok(Outcome::Partial)
    }
}

pub fn tune(run: &Run<TuneConfig>) -> Result<Outcome> {
    let c = &run.config;
    let data = prepare(run.config_path, &c.data)?;
    let grid = c.grid.resolve(data.y.view(), data.x.view())?;
    let report = grid_search_with(data.y.view(), data.x.view(), &grid, &c.graph, &c.search)?;
    write_json(&run.out("selection.json"), &report)?;

    let path = run.out("bic_table.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["lambda0", "lambda1", "lambda2", "df", "rss", "bic"])?;
    for r in &report.bic_table {
        w.write_record([
            r.lambda0.to_string(),
            r.lambda1.to_string(),
            r.lambda2.to_string(),
            r.df.to_string(),
            r.rss.to_string(),
            r.bic.to_string(),
        ])?;
    }
    w.flush()?;
    info!("wrote {}", path.display());
    write_coefficients(&run.out("coefficients.csv"), &data, &report.fit.beta)?;

    let stalled = report.bic_table.iter().filter(|r| !r.converged).count();
    if stalled == 0 {
        Ok(Outcome::Complete)
    } else {
        warn!(
            "{stalled} of {} grid cells did not converge",
            report.bic_table.len()
        );
        Ok(Outcome::Partial)
    }
}

pub fn backtest(run: &Run<BacktestFile>) -> Result<Outcome> {
    let c = &run.config;
    let panel = match (&c.prices, &c.synthetic) {
        (Some(p), None) => load_prices(&relative_to(run.config_path, p), &c.load)?,
        (None, Some(s)) => {
            let sp = synthetic_panel(&s.spec(run.seed))?;
            sp.panel.write_csv(&run.out("panel.csv"))?;
            info!("wrote {}", run.out("panel.csv").display());
            sp.panel
        }
        _ => bail!("give exactly one of `prices` and `[synthetic]`"),
    };
    let report = run_backtest(&panel, &c.backtest)?;
    write_json(&run.out("backtest.json"), &report)?;
    write_window_csv(&run.out("windows.csv"), &report)?;
    info!("wrote {}", run.out("windows.csv").display());
    for (m, ate) in &report.ate_by_size {
        info!("m={m}: mean ATE {ate:.6}");
    }
    if report.failure_count == 0 {
        Ok(Outcome::Complete)
    } else {
        warn!("{} size/window fits failed", report.failure_count);
        Ok(Outcome::Partial)
    }
}
