//! Metrics and analyses over identification results: validation RMSE,
//! the cases × scenarios matrix, parameter errors, the weighted cost
//! function and the per-level reports.

pub mod cost;
pub mod crossval;
pub mod levels;
pub mod metrics;

pub use cost::{
    cost_table, load_metrics, metrics_from_csv_reader, metrics_to_csv_string, normalize_column, select_optimal,
    select_with_weights, CaseMetrics, CaseRecord, CostOption, CostRow, CostTable, CostWeights, Selection,
};
pub use crossval::{base_error_masses, cross_validate, RmseMatrix};
pub use levels::{dataset_diff, level_reports, DatasetDiff, LevelReport};
pub use metrics::{
    composition_from_masses, param_errors, rmse, rmse_composition_check, rmse_of, CompositionVerdict, ErrorMass,
    ParamErrorReport,
};
