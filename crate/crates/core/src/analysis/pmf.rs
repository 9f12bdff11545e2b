use std::collections::BTreeMap;

use thiserror::Error;

use crate::scalar::Probability;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PmfError {
    #[error("negative mass")]
    Negative,
    #[error("masses sum to {total}, not 1")]
    NotNormalized { total: f64 },
    #[error("empty support")]
    Empty,
}

/// A finite distribution over outcomes `K` with masses in `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf<K: Ord, P> {
    mass: BTreeMap<K, P>,
}

impl<K: Ord + Clone, P: Probability> Pmf<K, P> {
    /// Validates non-negativity and normalization.
    pub fn new(mass: BTreeMap<K, P>) -> Result<Self, PmfError> {
        let pmf = Self::unchecked(mass)?;
        pmf.check_normalized()?;
        Ok(pmf)
    }

    /// Only non-negativity is checked.
    pub fn unchecked(mass: BTreeMap<K, P>) -> Result<Self, PmfError> {
        if mass.values().any(|p| p.is_negative()) {
            return Err(PmfError::Negative);
        }
        Ok(Self { mass })
    }

    pub fn point(outcome: K) -> Self {
        Self {
            mass: BTreeMap::from([(outcome, P::one())]),
        }
    }

    pub fn uniform<I: IntoIterator<Item = K>>(outcomes: I) -> Result<Self, PmfError> {
        let mut counts = BTreeMap::new();
        for k in outcomes {
            *counts.entry(k).or_insert(0u128) += 1;
        }
        Self::from_counts(counts)
    }

    /// Normalizes occurrence counts.
    pub fn from_counts(counts: BTreeMap<K, u128>) -> Result<Self, PmfError> {
        let total: u128 = counts.values().sum();
        if total == 0 {
            return Err(PmfError::Empty);
        }
        Ok(Self {
            mass: counts
                .into_iter()
                .filter(|(_, c)| *c > 0)
                .map(|(k, c)| (k, P::from_ratio(c, total)))
                .collect(),
        })
    }

    pub fn mass(&self, outcome: &K) -> P {
        self.mass.get(outcome).cloned().unwrap_or_else(P::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = &K> {
        self.mass.iter().filter(|(_, p)| !p.is_zero()).map(|(k, _)| k)
    }

    pub fn total(&self) -> P {
        self.mass.values().fold(P::zero(), |acc, p| acc + p.clone())
    }

    pub fn check_normalized(&self) -> Result<(), PmfError> {
        let total = self.total();
        if (total.clone() - P::one()).abs() > P::tolerance() {
            return Err(PmfError::NotNormalized {
                total: total.to_f64(),
            });
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &P)> {
        self.mass.iter()
    }
}

/// Half the L1 distance; outcomes missing from one side have mass zero there.
pub fn statistical_distance<K: Ord + Clone, P: Probability>(
    p: &Pmf<K, P>,
    q: &Pmf<K, P>,
) -> Result<P, PmfError> {
    p.check_normalized()?;
    q.check_normalized()?;
    let mut sum = P::zero();
    for (k, a) in &p.mass {
        sum = sum + (a.clone() - q.mass(k)).abs();
    }
    for (k, b) in &q.mass {
        if !p.mass.contains_key(k) {
            sum = sum + b.clone();
        }
    }
    Ok(sum / (P::one() + P::one()))
}
