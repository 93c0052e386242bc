//! Training loop, evaluation against PFTF, exhaustive oracle, experiment
//! configuration and CDF export.

pub mod cdf;
pub mod config;
pub mod evaluate;
pub mod oracle;
pub mod pool;
pub mod selfcheck;
pub mod train;

pub use cdf::{empirical_cdf, export_cdf, format_cdf, parse_cdf, CDF_HEADER};
pub use config::{EvaluationConfig, ExperimentConfig, TrainingConfig, PROFILES};
pub use evaluate::{
    baseline_rewards, evaluate_against_baseline, evaluation_pool, median, snr_ce_label, snr_ce_sweep,
    EnvironmentResult, EvaluationReport, SNR_CE_SWEEP_DB,
};
pub use oracle::{exhaustive_oracle, leaf_count, leaf_reward, OracleResult, DEFAULT_ORACLE_BUDGET};
pub use pool::Scenario;
pub use train::{run_training, run_training_from, IterationMetrics, TrainingOutcome};
