//! Sparse Laplacian shrinkage with a graphical-lasso graph.
//!
//! Two-stage sparse regression for correlated predictors: the graphical
//! lasso estimates the predictor precision matrix `Θ̂`, its graph Laplacian
//! `Γ̂ = D̂ − Θ̂` becomes a quadratic penalty, and
//!
//! ```text
//! ½‖y − Xβ‖² + λ₁‖β‖₁ + (λ₂/2) βᵀΓ̂β
//! ```
//!
//! is minimized by coordinate descent. Around that core the crate provides
//! correlation-based rival graphs, BIC model selection, a seeded simulation
//! lab and an index-tracking backtester.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`.

// `!(x > 0)` style guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod graph;
pub mod linalg;
pub mod numeric;
pub mod sampling;
pub mod scalar;
pub mod selection;
pub mod sim;
pub mod solver;
pub mod tracker;

pub use error::{Error, Result};
pub use sampling::RngSeed;
pub use scalar::Real;

pub type PrecisionEstimate64 = graph::PrecisionEstimate<f64>;
pub type LaplacianMatrix64 = graph::LaplacianMatrix<f64>;
pub type AdjacencyMatrix64 = graph::AdjacencyMatrix<f64>;
pub type GlassoConfig64 = graph::GlassoConfig<f64>;
pub type RegressionProblem64 = solver::RegressionProblem<f64>;
pub type PenaltySpec64 = solver::PenaltySpec<f64>;
pub type SolverConfig64 = solver::SolverConfig<f64>;
pub type FitResult64 = solver::FitResult<f64>;
pub type TuningGrid64 = selection::TuningGrid<f64>;
pub type SelectionReport64 = selection::SelectionReport<f64>;
