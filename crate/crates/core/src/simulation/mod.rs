//! Monte Carlo propagation of data errors into indicators, replicate
//! summaries, synthetic scenarios and the worked exercises.

mod exercise;
mod propagate;
mod report;
mod scenario;
mod summary;
mod synth;

pub use exercise::{
    exercise_data, run_exercise, synthetic_confusion_table, Exercise, ExerciseConfig, ExerciseOutput,
    ExerciseReport, FrequencyTables, TrainingInputs, TrainingSummary, EMBEDDED_CITATION_TOTAL,
    EMBEDDED_CORRELATION,
};
pub use propagate::{
    observed_indicators, propagate, propagate_with_dump, Indicator, IndicatorDistribution, PropagationConfig,
    PropagationResult, DEFAULT_ITERATIONS,
};
pub use report::{
    fmt2, render_exercise, render_frequency_tables, render_indicator_table, write_interval_csv,
    write_uncertainty_csv, Report, ReportEntry, UnitReport,
};
pub use scenario::{generate_scenario, Discretize, ScenarioConfig, ScenarioSet, DEFAULT_DOCTYPE_MIX, DEFAULT_SCALING};
pub use summary::{quantile, relative_uncertainty, summarize, DistributionSummary};
pub use synth::{synthesize_training_sample, SyntheticSample, R_TOLERANCE};
