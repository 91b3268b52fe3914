//! Cross-validation, F1, the two significance tests and result aggregation.

mod aggregate;
mod folds;
mod results;
mod shift;
mod tests;

pub use aggregate::{
    compare_runs, figure_data, model_breakdown, performance_table, summarize, BreakdownCell, FigureAxis, FigureRow,
    GroupSummary, PerformanceRow, Provenance, Winner,
};
pub use folds::{make_folds, FoldPlan};
pub use results::{cross_validate, CellFailure, Condition, CvOutcome, LedgerEntry, RunResult};
pub use shift::{feature_shift_tables, significant_feature_ratio, FeatureShift};
pub use tests::{
    binomial_two_sided, f1_score, mann_whitney_u, mann_whitney_u_approx, mcnemar, mcnemar_counts, StatMethod,
    StatResult, Statistic, DEFAULT_ALPHA, EXACT_MCNEMAR_MAX, EXACT_U_MAX_N,
};
