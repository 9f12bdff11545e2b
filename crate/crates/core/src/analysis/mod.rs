//! Statistical distance, exhaustive privacy checks, Monte Carlo reliability and rate accounting.

mod pmf;
pub mod privacy;
pub mod rate;
pub mod reliability;

use thiserror::Error;

use crate::channels::SimulationFault;
use crate::hashing::HashError;
use crate::params::ParamsError;

pub use pmf::{statistical_distance, Pmf, PmfError};
pub use privacy::{exhaustive_privacy_check, PrivacyConfig, PrivacyReport, PrivacyStrategy, PrivacyTarget, ViewMode};
pub use rate::{rate_accounting, RateReport};
pub use reliability::{
    l_for_kappa, monte_carlo_reliability, reliability_bound, reliability_trials, summarize,
    wilson_interval, ReliabilityReport, TrialRecord,
};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Hash(#[from] HashError),
    #[error(transparent)]
    Pmf(#[from] PmfError),
    #[error(transparent)]
    Simulation(#[from] SimulationFault),
    #[error("enumeration needs about 2^{log2_size} steps, beyond the exhaustive limit")]
    SpaceTooLarge { log2_size: usize },
    #[error("{trials} trials requested, at least {min} needed")]
    TooFewTrials { trials: u64, min: u64 },
    #[error("corrupted set {0:?} is out of range or over budget")]
    Corrupted(Vec<usize>),
}
