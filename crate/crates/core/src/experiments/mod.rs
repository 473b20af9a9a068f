//! Monte Carlo runs over sampled scenarios and the finite-run hypothesis test.

pub mod hyptest;
pub mod record;
pub mod scatter;
pub mod summary;

pub use hyptest::{
    aggregated_decision, exact_disagreement, partitioned_decision, run_hyptest,
    run_hyptest_with_model, write_outcomes_csv, ClickModel, HypTestOutcome, HypTestReport,
    HypTestSetup, Measurement,
};
pub use record::{format_sig12, write_csv, YsRecord};
pub use scatter::{run_scatter, run_trial, ScatterRun};
pub use summary::{summarize, wilson_interval, CategoryRates, Rate, RunSummary, Z_95};
