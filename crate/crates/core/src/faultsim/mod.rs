//! Fault-injection campaigns over compiled dual-rail netlists.

mod campaign;
pub mod pattern;
pub mod report;
pub mod rng;

use thiserror::Error;

pub use campaign::{
    exhaustive_single_fault, run_campaign, run_trial, CampaignConfig, CampaignResult, InputPolicy,
    SdcCase, SingleFaultResult, MAX_EXHAUSTIVE_INPUTS,
};
pub use pattern::{sample_pattern, FaultMode, FaultPattern, Polarity};
pub use report::{fault_coverage, CoverageReport, ReportMeta, ReportMode, Stratum, TrialRecord};
pub use rng::{trial_rng, SplitMix64};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum CampaignError {
    #[error("no fault sizes given")]
    NoSizes,
    #[error("trial count must be at least 1")]
    ZeroTrials,
    #[error("{trials} trials cannot cover {strata} fault sizes")]
    TooFewTrials { trials: u64, strata: usize },
    #[error("fault size {size} outside 1..={sites} (the netlist has {sites} fault sites)")]
    SizeOutOfRange { size: usize, sites: usize },
    #[error("exhaustive input enumeration needs at most {max} inputs, netlist has {inputs}")]
    TooManyInputs { inputs: usize, max: usize },
    #[error("netlist has no fault sites")]
    NoSites,
    #[error("thread pool: {0}")]
    ThreadPool(String),
}
