//! Uncertainty-quantification campaigns over a model of QoI time series.

pub mod campaign;
pub mod config;
pub mod export;
pub mod mc;
pub mod model;
pub mod tune;
pub mod violation;

pub use campaign::{
    run_campaign, run_two_stage, screen_parameters, CampaignConfig, CampaignResult, NominalRun, QoiResult, TimePoint,
    Timing, DEFAULT_SCREEN_THRESHOLD,
};
pub use config::FileConfig;
pub use mc::{compare_budget, run_mc_baseline, BudgetReport, Histogram, McBaseline, McQoi, DEFAULT_MC_RUNS};
pub use model::{BatteryModel, FnModel, ModelRun, QoiModel};
pub use tune::{tune_protocol, CandidateResult, TuneGrid, TuneReport};
pub use violation::{violation_probability, violation_probability_with, Constraint, ConstraintSeries, ViolationProbability};
