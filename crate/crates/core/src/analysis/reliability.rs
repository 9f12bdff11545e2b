use rayon::prelude::*;
use serde::Serialize;

use super::AnalysisError;
use crate::bits::BitString;
use crate::channels::adversaries::AdversaryKind;
use crate::params::ProtocolParams;
use crate::protocol::run_pi1;
use crate::random::RandomStream;
use crate::scalar::Probability;

pub const MIN_TRIALS: u64 = 1000;

/// Two-sided 99% standard normal quantile.
pub const Z_99: f64 = 2.5758293035489004;

/// `(n - 1) * 2^(1 - l)`.
pub fn reliability_bound<P: Probability>(params: &ProtocolParams) -> P {
    P::from_ratio(params.n as u128 - 1, 1) * P::pow2(1 - params.l as i32)
}

/// Smallest `l` with `(n - 1) * 2^(1 - l) <= 2^-kappa`.
pub fn l_for_kappa(n: usize, kappa: usize) -> usize {
    let log_ceil = (usize::BITS - (n.max(2) - 2).leading_zeros()) as usize;
    kappa + log_ceil + 1
}

/// Wilson score interval for `failures` out of `trials`.
pub fn wilson_interval(failures: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = failures as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub delivered: bool,
    /// Wires the sender verified.
    pub verified: String,
    /// Wires the receiver dropped.
    pub dropped: String,
    pub bad_wires: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReliabilityReport {
    pub n: usize,
    pub t: usize,
    pub m: usize,
    pub l: usize,
    pub seed: u64,
    pub adversary: String,
    pub trials: u64,
    pub failures: u64,
    pub failure_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bound: f64,
    /// Failures that could not be traced to a bad wire. Always zero for a correct protocol.
    pub unexplained_failures: u64,
    pub min_verified: usize,
    pub passed: bool,
}

/// Independent executions of the protocol, trial `i` drawing everything from the sub-stream
/// `("trial", i)` of the seed. Records come back in trial order.
pub fn reliability_trials(
    params: &ProtocolParams,
    adversary: AdversaryKind,
    trials: u64,
) -> Result<Vec<TrialRecord>, AnalysisError> {
    params.validate()?;
    let root = RandomStream::new(params.seed);
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let stream = root.split("trial", trial);
            let message: BitString = stream.split("message", 0).bits(params.m);
            let mut adv = adversary.build();
            let outcome = run_pi1(params, &message, adv.as_mut(), &stream)?;
            Ok(TrialRecord {
                trial,
                delivered: outcome.delivered(),
                verified: outcome.v().map(|v| v.to_string()).unwrap_or_default(),
                dropped: outcome.b().map(|b| b.to_string()).unwrap_or_default(),
                bad_wires: outcome.bad_wires(),
            })
        })
        .collect()
}

pub fn summarize(
    params: &ProtocolParams,
    adversary: AdversaryKind,
    records: &[TrialRecord],
) -> ReliabilityReport {
    let trials = records.len() as u64;
    let failures = records.iter().filter(|r| !r.delivered).count() as u64;
    let unexplained = records
        .iter()
        .filter(|r| !r.delivered && r.bad_wires.is_empty())
        .count() as u64;
    let (ci_low, ci_high) = wilson_interval(failures, trials.max(1), Z_99);
    let bound: f64 = reliability_bound(params);
    ReliabilityReport {
        n: params.n,
        t: params.t,
        m: params.m,
        l: params.l,
        seed: params.seed,
        adversary: adversary.to_string(),
        trials,
        failures,
        failure_rate: failures as f64 / trials.max(1) as f64,
        ci_low,
        ci_high,
        bound,
        unexplained_failures: unexplained,
        min_verified: records
            .iter()
            .map(|r| r.verified.bytes().filter(|&b| b == b'1').count())
            .min()
            .unwrap_or(0),
        passed: ci_high <= bound && unexplained == 0,
    }
}

/// Empirical failure rate with a 99% Wilson interval; passes when the upper endpoint is at most
/// the analytic bound.
pub fn monte_carlo_reliability(
    params: &ProtocolParams,
    adversary: AdversaryKind,
    trials: u64,
) -> Result<ReliabilityReport, AnalysisError> {
    if trials < MIN_TRIALS {
        return Err(AnalysisError::TooFewTrials { trials, min: MIN_TRIALS });
    }
    let records = reliability_trials(params, adversary, trials)?;
    Ok(summarize(params, adversary, &records))
}
