use std::fs;
use std::io;

use thiserror::Error;

use smtpd::analysis::{
    exhaustive_privacy_check, l_for_kappa, rate_accounting, reliability_trials, summarize, AnalysisError,
    PrivacyConfig, RateReport, ViewMode,
};
use smtpd::analysis::reliability::MIN_TRIALS;
use smtpd::attacks::{builtin, run_attack, Attack, AttackError, ToyProtocol, BUILTIN_TOYS};
use smtpd::hashing::HashError;
use smtpd::params::ProtocolParams;

use crate::output::Sink;
use crate::{AttackArgs, Common, Format, PrivacyArgs, RateArgs, ReliabilityArgs, Shape, ToyArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("output: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) | CliError::Io(_) => 2,
            CliError::Infeasible(_) => 3,
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::SpaceTooLarge { .. } | AnalysisError::Hash(HashError::KeySpaceTooLarge { .. }) => {
                CliError::Infeasible(e.to_string())
            }
            e => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<AttackError> for CliError {
    fn from(e: AttackError) -> Self {
        match e {
            AttackError::SpaceTooLarge { .. } => CliError::Infeasible(e.to_string()),
            e => CliError::Invalid(e.to_string()),
        }
    }
}

impl Shape {
    fn params(&self, default_n: usize, default_l: usize, m: usize, seed: u64) -> Result<ProtocolParams, CliError> {
        let n = self.n.unwrap_or(default_n);
        let t = self.t.unwrap_or(n.saturating_sub(1));
        let l = match self.kappa {
            Some(kappa) if n >= 2 => l_for_kappa(n, kappa),
            _ => self.l.unwrap_or(default_l),
        };
        ProtocolParams::new(n, t, m, l, seed).map_err(|e| CliError::Invalid(e.to_string()))
    }
}

fn sink(common: &Common) -> Result<Sink, CliError> {
    Ok(Sink::open(common.output.as_deref(), !common.no_timestamp)?)
}

fn json_only(common: &Common, command: &str) -> Result<(), CliError> {
    match common.format {
        Format::Json => Ok(()),
        Format::Csv => Err(CliError::Invalid(format!("{command} emits JSON lines only"))),
    }
}

pub fn reliability(a: ReliabilityArgs) -> Result<bool, CliError> {
    json_only(&a.common, "reliability")?;
    let params = a.shape.params(4, 8, a.m, a.common.seed)?;
    if a.trials < MIN_TRIALS {
        return Err(CliError::Invalid(format!("need at least {MIN_TRIALS} trials, got {}", a.trials)));
    }
    let records = reliability_trials(&params, a.adversary, a.trials)?;
    let report = summarize(&params, a.adversary, &records);
    let mut out = sink(&a.common)?;
    if !a.summary_only {
        for r in &records {
            out.record("trial", r)?;
        }
    }
    out.record("summary", &report)?;
    out.finish()?;
    Ok(report.passed)
}

pub fn privacy(a: PrivacyArgs) -> Result<bool, CliError> {
    json_only(&a.common, "privacy")?;
    let params = a.shape.params(2, 1, a.m, a.common.seed)?;
    let mut config = PrivacyConfig::new(params, a.adversary);
    config.target = a.protocol;
    if a.raw {
        config.mode = ViewMode::Raw;
    }
    let report = exhaustive_privacy_check(&config)?;
    let mut out = sink(&a.common)?;
    out.record("privacy", &report)?;
    out.finish()?;
    Ok(report.passed)
}

fn default_toy(attack: Attack) -> &'static str {
    match attack {
        Attack::Swap => "otp2",
        Attack::Oneway => "xor2",
        Attack::ImpersonateS => "otp3",
        Attack::ImpersonateR => "relay3",
    }
}

fn load_toy(name: &str) -> Result<ToyProtocol, CliError> {
    if let Some(toy) = builtin(name) {
        return Ok(toy?);
    }
    let json = fs::read_to_string(name)
        .map_err(|e| CliError::Invalid(format!("toy {name:?} is neither built in nor readable: {e}")))?;
    Ok(ToyProtocol::from_json(&json)?)
}

pub fn attack(a: AttackArgs) -> Result<bool, CliError> {
    json_only(&a.common, "attack")?;
    let toy = load_toy(a.toy.as_deref().unwrap_or(default_toy(a.demo)))?;
    let report = run_attack(&toy, a.demo)?;
    let mut out = sink(&a.common)?;
    out.record("attack", &report)?;
    out.finish()?;
    Ok(report.passed)
}

pub fn rate(a: RateArgs) -> Result<bool, CliError> {
    let mut ms = a.m.clone();
    if let Some((lo, hi)) = a.sweep_log2 {
        ms.extend((lo..=hi).map(|k| 1usize << k));
    }
    if ms.is_empty() {
        return Err(CliError::Invalid("give --m or --sweep-log2".into()));
    }
    let reports = ms
        .iter()
        .map(|&m| Ok(rate_accounting(&a.shape.params(4, 8, m, a.common.seed)?)?))
        .collect::<Result<Vec<RateReport>, CliError>>()?;
    let mut out = sink(&a.common)?;
    match a.common.format {
        Format::Json => {
            for r in &reports {
                out.record("rate", r)?;
            }
        }
        Format::Csv => {
            out.line(RateReport::CSV_HEADER)?;
            for r in &reports {
                out.line(&r.csv_row())?;
            }
        }
    }
    out.finish()?;
    Ok(reports.iter().all(|r| r.public_bits == r.formula_bits))
}

pub fn toy(a: ToyArgs) -> Result<bool, CliError> {
    let Some(name) = a.name else {
        for name in BUILTIN_TOYS {
            println!("{name}");
        }
        return Ok(true);
    };
    let toy = builtin(&name).ok_or_else(|| CliError::Invalid(format!("no built-in toy {name:?}")))??;
    let spec = toy
        .to_spec()
        .ok_or_else(|| CliError::Invalid(format!("{name} is computed, not tabulated")))?;
    println!("{}", serde_json::to_string_pretty(&spec).map_err(|e| CliError::Invalid(e.to_string()))?);
    Ok(true)
}
