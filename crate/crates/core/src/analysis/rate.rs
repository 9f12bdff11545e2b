use serde::Serialize;

use super::AnalysisError;
use crate::bits::BitString;
use crate::channels::adversaries::Passive;
use crate::hashing::HashParams;
use crate::params::ProtocolParams;
use crate::protocol::{public_bits, run_pi1};
use crate::random::RandomStream;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub n: usize,
    pub m: usize,
    pub l: usize,
    pub s: usize,
    pub d: usize,
    pub key_bits: usize,
    pub message_bits: u64,
    pub wire_bits: u64,
    pub public_bits: u64,
    /// `(4sd + l + 2)n + m`.
    pub formula_bits: u64,
    pub wire_rate: f64,
    pub public_rate: f64,
    /// Public bits of an `n`-fold repetition of the message, `n * m`.
    pub baseline_public_bits: u64,
    pub baseline_log2: f64,
}

impl RateReport {
    pub const CSV_HEADER: &'static str = "n,m,l,s,d,key_bits,wire_bits,public_bits,formula_bits,wire_rate,public_rate,baseline_public_bits,baseline_log2";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.m,
            self.l,
            self.s,
            self.d,
            self.key_bits,
            self.wire_bits,
            self.public_bits,
            self.formula_bits,
            self.wire_rate,
            self.public_rate,
            self.baseline_public_bits,
            self.baseline_log2
        )
    }
}

/// Counts the bits of one untampered execution and sets them beside the closed form.
pub fn rate_accounting(params: &ProtocolParams) -> Result<RateReport, AnalysisError> {
    params.validate()?;
    let hash = HashParams::derive(params.m, params.l)?;
    let stream = RandomStream::new(params.seed);
    let message: BitString = stream.split("message", 0).bits(params.m);
    let outcome = run_pi1(params, &message, &mut Passive::default(), &stream)?;
    let transcript = &outcome.execution.transcript;
    let (n, m) = (params.n as u64, params.m as u64);
    let formula_bits = public_bits(params, &hash, 0);
    let baseline = n * m;
    Ok(RateReport {
        n: params.n,
        m: params.m,
        l: params.l,
        s: hash.block_bits(),
        d: hash.depth(),
        key_bits: hash.key_bits(),
        message_bits: m,
        wire_bits: transcript.wire_bits_sent,
        public_bits: transcript.public_bits_sent,
        formula_bits,
        wire_rate: transcript.wire_bits_sent as f64 / m as f64,
        public_rate: transcript.public_bits_sent as f64 / m as f64,
        baseline_public_bits: baseline,
        baseline_log2: (baseline as f64).log2(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_instance() {
        let p = ProtocolParams::new(4, 3, 64, 8, 1).unwrap();
        let r = rate_accounting(&p).unwrap();
        assert_eq!(r.wire_bits, 4 * 72);
        assert_eq!(r.wire_rate, 4.5);
        assert_eq!((r.s, r.d), (11, 3));
        assert_eq!(r.public_bits, r.formula_bits);
        assert_eq!(r.formula_bits, (4 * 11 * 3 + 8 + 2) * 4 + 64);
        assert_eq!(r.csv_row().split(',').count(), RateReport::CSV_HEADER.split(',').count());
    }

    #[test]
    fn public_rate_falls_with_m() {
        let mut last = f64::INFINITY;
        for k in 6..=16 {
            let p = ProtocolParams::new(5, 4, 1 << k, 8, 0).unwrap();
            let r = rate_accounting(&p).unwrap();
            assert_eq!(r.public_bits, r.formula_bits);
            assert!(r.public_rate < last, "m = 2^{k}");
            last = r.public_rate;
        }
    }
}
