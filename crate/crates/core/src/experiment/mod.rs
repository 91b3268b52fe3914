//! Experiment orchestration: configuration, corpus manifests, the
//! (condition × feature set × model × seed) grid, and the reports.

mod config;
mod manifest;
mod report;
mod run;
pub mod synthetic;

pub use config::{
    CorpusSection, EvaluationSection, ExperimentConfig, FeaturesSection, ModelsSection, NoiseSection, OutputSection,
    TestAudio,
};
pub use manifest::{CorpusManifest, ManifestRow};
pub use report::{
    feature_shift_rows, load_runs, report_features, report_performance, PerformanceReport, Shade, ShiftCell, ShiftRow,
    BREAKDOWN_CSV, FEATURE_SHIFT_CSV, FIGURE_FEATURES_CSV, FIGURE_MODELS_CSV, PERFORMANCE_COLUMNS, PERFORMANCE_CSV,
    REPORTS_DIR,
};
pub use run::{
    condition_stem, conditions, feature_table_path, grid, materialize, read_ledger, restrict, run, validate, Cell,
    RunMeta, RunOptions, RunSummary, ValidationReport, FEATURES_DIR, LEDGER_FILE, META_FILE, MODEL_NOTES, SUMMARY_FILE,
};
