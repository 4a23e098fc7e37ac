//! Predictor-graph estimation: graphical lasso, correlation adjacencies and
//! the Laplacian penalty kernel built from either.

pub mod adjacency;
pub mod glasso;
pub mod io;
pub mod laplacian;

pub use adjacency::{
    adjacency_from_correlation, fisher_threshold, AdjacencyMatrix, AdjacencyMeasure,
};
pub use glasso::{
    default_lambda0_grid, edge_set, glasso_fit, glasso_kkt_residual, glasso_objective,
    GlassoConfig, PrecisionEstimate,
};
pub use io::{edge_list, read_matrix_csv, write_matrix_csv, Edge, EdgeList};
pub use laplacian::{laplacian_build, GraphInput, LaplacianMatrix, LaplacianSource};
