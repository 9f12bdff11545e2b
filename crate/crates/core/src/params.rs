use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParamsError {
    #[error("need at least two wires, got n = {0}")]
    TooFewWires(usize),
    #[error("corruption budget must satisfy 1 <= t <= n - 1 (n = {n}, t = {t})")]
    Budget { n: usize, t: usize },
    #[error("lengths must satisfy 1 <= l <= m and m >= 2 (m = {m}, l = {l})")]
    Lengths { m: usize, l: usize },
}

/// Parameters of one protocol instance: `n` wires, up to `t` corrupted, `m`-bit messages and
/// `l`-bit tags and pads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub n: usize,
    pub t: usize,
    pub m: usize,
    pub l: usize,
    pub seed: u64,
}

impl ProtocolParams {
    pub fn new(n: usize, t: usize, m: usize, l: usize, seed: u64) -> Result<Self, ParamsError> {
        let params = Self { n, t, m, l, seed };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        if self.n < 2 {
            return Err(ParamsError::TooFewWires(self.n));
        }
        if self.t == 0 || self.t >= self.n {
            return Err(ParamsError::Budget {
                n: self.n,
                t: self.t,
            });
        }
        if self.l == 0 || self.m < self.l || self.m < 2 {
            return Err(ParamsError::Lengths {
                m: self.m,
                l: self.l,
            });
        }
        Ok(())
    }

    /// Round-one payload width on every wire: an `l`-bit pad followed by an `m`-bit pad.
    pub fn wire_payload_bits(&self) -> usize {
        self.l + self.m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_model_regime() {
        assert!(ProtocolParams::new(2, 1, 2, 1, 0).is_ok());
        assert!(ProtocolParams::new(4, 3, 64, 8, 0).is_ok());
        assert!(ProtocolParams::new(2, 1, 2, 2, 0).is_ok());
    }

    #[test]
    fn rejects_violations() {
        assert_eq!(
            ProtocolParams::new(4, 4, 64, 8, 0),
            Err(ParamsError::Budget { n: 4, t: 4 })
        );
        assert_eq!(
            ProtocolParams::new(4, 0, 64, 8, 0),
            Err(ParamsError::Budget { n: 4, t: 0 })
        );
        assert_eq!(
            ProtocolParams::new(4, 1, 8, 9, 0),
            Err(ParamsError::Lengths { m: 8, l: 9 })
        );
        assert_eq!(
            ProtocolParams::new(4, 1, 8, 0, 0),
            Err(ParamsError::Lengths { m: 8, l: 0 })
        );
        assert_eq!(
            ProtocolParams::new(1, 1, 8, 2, 0),
            Err(ParamsError::TooFewWires(1))
        );
    }
}
