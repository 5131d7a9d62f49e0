//! Monte Carlo experiments over the full allocate-then-design pipeline.

pub mod experiment;
pub mod scenario;
pub mod spec;
pub mod summary;

pub use experiment::{read_rows_csv, run_experiment, run_trial, trace_trial, write_rows_csv, ResultRow};
pub use scenario::Scenario;
pub use spec::{ExperimentSpec, Method, Preset, Sweep, SweepVar};
pub use summary::{summarize, write_summary_csv, SummaryRow};
