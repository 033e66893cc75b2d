//! Config-driven experiments: data preparation, the holdout loop over
//! every procedure, parameter sweeps and report tables.

mod config;
mod dataset;
mod runner;
mod sweep;
mod tables;

pub use config::{
    DatasetConfig, DatasetKind, ExperimentConfig, SweepAxis, SweepSpec, SynthSpec, DESK_TEST,
    DESK_TRAIN, ENV_HAPT_DIR, ENV_MNIST_DIR, PRESETS,
};
pub use dataset::{load_pool, prepare, Pool, Prepared};
pub use runner::{
    run_experiment, run_with_pool, ExperimentReport, OverheadRecord, RunPrediction, CLEAN,
    MALICIOUS,
};
pub use sweep::{sweep, SweepPoint, SweepReport};
pub use tables::{report_tables, OverheadRow, StepRow, Tables};
