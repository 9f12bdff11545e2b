//! Probability scalars: exact rationals for enumeration, floats for sampling summaries.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

pub trait Probability: Clone + Debug + PartialOrd + Num + Signed + Send + Sync {
    fn from_ratio(num: u128, den: u128) -> Self;

    /// `2^exp`.
    fn pow2(exp: i32) -> Self;

    fn to_f64(&self) -> f64;

    /// Largest acceptable deviation of a total mass from one.
    fn tolerance() -> Self;
}

impl Probability for f64 {
    fn from_ratio(num: u128, den: u128) -> Self {
        num as f64 / den as f64
    }

    fn pow2(exp: i32) -> Self {
        2f64.powi(exp)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn tolerance() -> Self {
        1e-12
    }
}

impl Probability for f32 {
    fn from_ratio(num: u128, den: u128) -> Self {
        (num as f64 / den as f64) as f32
    }

    fn pow2(exp: i32) -> Self {
        2f32.powi(exp)
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }

    fn tolerance() -> Self {
        1e-5
    }
}

impl Probability for BigRational {
    fn from_ratio(num: u128, den: u128) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn pow2(exp: i32) -> Self {
        let p = BigInt::one() << exp.unsigned_abs();
        if exp >= 0 {
            BigRational::from_integer(p)
        } else {
            BigRational::new(BigInt::one(), p)
        }
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn tolerance() -> Self {
        BigRational::zero()
    }
}

struct JsonInt<'a>(&'a BigInt);

impl Serialize for JsonInt<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

/// `{"num": .., "den": ..}` in lowest terms; integers beyond 64 bits become decimal strings.
pub fn serialize_exact<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    let mut st = s.serialize_struct("Ratio", 2)?;
    st.serialize_field("num", &JsonInt(x.numer()))?;
    st.serialize_field("den", &JsonInt(x.denom()))?;
    st.end()
}

/// [`serialize_exact`] for optional values; `None` becomes `null`.
pub fn serialize_exact_opt<S: Serializer>(x: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(x) => serialize_exact(x, s),
        None => s.serialize_none(),
    }
}
