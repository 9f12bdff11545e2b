pub mod analysis;
pub mod attacks;
pub mod bits;
pub mod channels;
pub mod hashing;
pub mod params;
pub mod protocol;
pub mod random;
pub mod scalar;

pub use scalar::Probability;

/// Exact probabilities.
pub type Exact = num_rational::BigRational;
pub type ExactPmf<K> = analysis::Pmf<K, Exact>;
pub type FloatPmf<K> = analysis::Pmf<K, f64>;
