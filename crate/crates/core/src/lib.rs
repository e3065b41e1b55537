//! Next-value prediction for discrete per-user rate (MCS) sequences.
//!
//! The crate is organised bottom-up:
//!
//! - [`alphabet`]: symbols, rate tables and feedback traces.
//! - [`freq_tree`]: counting tries built by Active LeZi or fixed-depth PPM.
//! - [`blend`]: recursive escape-weighted conditional probabilities.
//! - [`complexity`]: online predictive information and the order upper bound.
//! - [`order_select`]: MDL / AIC / AICc order selection under that bound.
//! - [`predict`]: MAP and Bayesian-risk decision rules, baselines and the
//!   per-user online pipeline.
//! - [`simgen`]: synthetic full/partial loading traces and exact Markov sources.
//! - [`metrics`]: packet loss, rate efficiency and empirical CDFs.

pub mod alphabet;
pub mod blend;
pub mod complexity;
mod error;
pub mod freq_tree;
pub mod metrics;
pub mod order_select;
pub mod predict;
pub mod simgen;

pub use alphabet::{default_rate_table, load_traces, write_traces, Alphabet, RateTable, Symbol, Trace};
pub use blend::{distribution, prob_blended, prob_order0};
pub use complexity::{ipred_instant, k_opt, learning_curve, PredictiveInfoEstimate};
pub use error::{Error, Result};
pub use freq_tree::{FrequencyTree, LeZiState};
pub use metrics::{cdf, packet_loss, rate_efficiency, UserMetrics};
pub use order_select::{criteria, n_params, select_order, sequence_loglik, Criterion, CriterionReport, ParamCount, SampleMode};
pub use predict::{
    predict_brm, predict_last, predict_map, predict_median, PipelineConfig, PredictorKind, StepOutput,
    UserPipeline,
};
pub use simgen::{generate_markov, generate_scenario, Loading, MarkovSourceConfig, ScenarioConfig};
