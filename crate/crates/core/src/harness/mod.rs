//! Experiment harness: scenario families, memoized greedy evaluation,
//! greedy-vs-additive runs and CSV / JSON-lines output.

mod generate;
mod memo;
mod run;
mod spec;

pub use generate::{
    generate_job_availability, generate_num_agents, generate_num_professions,
    generate_specialization, generate_standard,
};
pub use memo::{MemoCache, MemoStats, ModelOracle};
pub use run::{
    check_solo_weights, evaluation_seed, output_paths, read_records, relative_improvement,
    run_experiment, run_point, run_trial, training_seed, ExperimentRecord, PointConfig,
    PointOutcome, RunSummary, CSV_COLUMNS,
};
pub use spec::{ExperimentSpec, Family, Point};
