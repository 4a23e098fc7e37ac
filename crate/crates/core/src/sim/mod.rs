//! Synthetic regression scenarios and seeded replication studies.

mod scenario;
mod study;

pub use scenario::{
    generate_dataset, generate_test_set, scenario_covariance, true_beta, Dataset, ScenarioId,
    ScenarioMatrices, ScenarioSpec, FIG1_BETA,
};
pub use study::{
    compute_metrics, run_study, summarize, write_raw_csv, write_summary_csv, CellFailure, Method,
    MetricsSummary, MseKind, ReplicationResult, SelectionRule, StudyConfig, StudyOutcome,
};
