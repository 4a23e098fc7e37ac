use std::path::Path;

use anyhow::{bail, Context, Result};
use ndarray::{Array1, Array2};

/// Response, design and predictor names from a headed CSV.
#[derive(Debug, Clone)]
pub struct RegressionData {
    pub y: Array1<f64>,
    pub x: Array2<f64>,
    pub names: Vec<String>,
}

pub fn read_regression_csv(path: &Path, response: &str) -> Result<RegressionData> {
    let mut rdr =
        csv::Reader::from_path(path).with_context(|| format!("cannot open {}", path.display()))?;
    let header: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let Some(yi) = header.iter().position(|h| h == response) else {
        bail!(
            "{}: no response column {response:?} in header {header:?}",
            path.display()
        );
    };
    let names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != yi)
        .map(|(_, h)| h.clone())
        .collect();
    if names.is_empty() {
        bail!("{}: no predictor columns", path.display());
    }
    let mut y = Vec::new();
    let mut x = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        if rec.len() != header.len() {
            bail!(
                "{}:{line}: expected {} fields, found {}",
                path.display(),
                header.len(),
                rec.len()
            );
        }
        for (i, cell) in rec.iter().enumerate() {
            let v: f64 = cell.trim().parse().with_context(|| {
                format!(
                    "{}:{line}: column {:?}: not a number: {cell:?}",
                    path.display(),
                    header[i]
                )
            })?;
            if !v.is_finite() {
                bail!(
                    "{}:{line}: column {:?} is not finite",
                    path.display(),
                    header[i]
                );
            }
            if i == yi {
                y.push(v);
            } else {
                x.push(v);
            }
        }
    }
    if y.len() < 2 {
        bail!(
            "{}: need at least two rows, found {}",
            path.display(),
            y.len()
        );
    }
    let n = y.len();
    Ok(RegressionData {
        y: Array1::from(y),
        x: Array2::from_shape_vec((n, names.len()), x)?,
        names,
    })
}
