//! Manifest ingestion, condition-based ranking, and pipeline orchestration.

mod condition;
mod manifest;
mod pipeline;

pub use condition::{
    assign_condition, rank_systems, ConditionTable, RankedSystem, SystemEntry,
    CONDITION_THRESHOLDS,
};
pub use manifest::{Gender, Manifest, ManifestRecord, SubsetRole};
pub use pipeline::{
    evaluate, results_csv, results_summary, run_pipeline, DatasetInputs, DatasetMetrics,
    EvalConfig, PipelineStatus, SubmissionReport,
};
