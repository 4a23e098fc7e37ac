//! Dense CSV and edge-list JSON encodings of graph matrices.

use std::io::{Read, Write};

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Writes a dense matrix row-major with a header row of column indices.
pub fn write_matrix_csv<T: Real, W: Write>(m: ArrayView2<T>, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record((0..m.ncols()).map(|j| j.to_string()))?;
    for row in m.rows() {
        w.write_record(row.iter().map(|v| format!("{:e}", v.as_f64())))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_csv<R: Read>(reader: R) -> Result<Array2<f64>> {
    let mut r = csv::Reader::from_reader(reader);
    let cols = r.headers()?.len();
    let mut data = Vec::new();
    let mut rows = 0;
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != cols {
            return Err(Error::Parse {
                line: k + 2,
                message: format!("expected {cols} fields, got {}", rec.len()),
            });
        }
        for field in rec.iter() {
            data.push(field.trim().parse::<f64>().map_err(|e| Error::Parse {
                line: k + 2,
                message: e.to_string(),
            })?);
        }
        rows += 1;
    }
    Array2::from_shape_vec((rows, cols), data).map_err(|e| Error::DimensionMismatch(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeList {
    pub edges: Vec<Edge>,
}

/// Nonzero upper-triangle entries `(i < j)` of a symmetric matrix.
pub fn edge_list<T: Real>(m: ArrayView2<T>) -> EdgeList {
    let p = m.nrows();
    let mut edges = Vec::new();
    for i in 0..p {
        for j in (i + 1)..m.ncols() {
            let w = m[[i, j]];
            if w != T::zero() {
                edges.push(Edge {
                    i,
                    j,
                    w: w.as_f64(),
                });
            }
        }
    }
    EdgeList { edges }
}
