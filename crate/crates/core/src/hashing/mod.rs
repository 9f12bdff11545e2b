//! An almost strongly universal hash family `{0,1}^m -> {0,1}^l` built as a binary tree of
//! strongly universal compressions.
//!
//! Each level `j` carries a key `(a_j, b_j)` in GF(2^{2s}). A level maps a pair of `s`-bit
//! blocks `x` to the top `s` bits of `a_j * x + b_j`. The input is split into `s`-bit blocks,
//! zero-padded to `2^d` blocks, and compressed `d` times; the top `l` bits of the surviving block
//! are the digest.

pub mod field;
pub mod oracle;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::bits::{BitString, BitsError};
use crate::random::RandomStream;
pub use field::BinaryField;

/// Key spaces up to `2^MAX_ENUMERABLE_KEY_BITS` keys may be enumerated exhaustively.
pub const MAX_ENUMERABLE_KEY_BITS: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HashError {
    #[error("hash parameters need m >= l >= 1 and m >= 2 (m = {m}, l = {l})")]
    Params { m: usize, l: usize },
    #[error("block size s = {0} exceeds the supported maximum of 63")]
    BlockTooWide(usize),
    #[error("expected {expected} bits, got {got}")]
    Length { expected: usize, got: usize },
    #[error("a key needs at least one level")]
    EmptyKey,
    #[error("key space of 2^{bits} keys is too large to enumerate (limit 2^{limit}); use Monte Carlo")]
    KeySpaceTooLarge { bits: usize, limit: usize },
    #[error(transparent)]
    Bits(#[from] BitsError),
}

fn ceil_log2(x: usize) -> usize {
    assert!(x >= 1);
    (usize::BITS - (x - 1).leading_zeros()) as usize
}

/// Geometry of the family for a fixed `(m, l)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashParams {
    m: usize,
    l: usize,
    s: usize,
    depth: usize,
    field: BinaryField,
}

impl HashParams {
    /// `s = max(2, l + ceil(log2(ceil(log2 m))))`, `d = max(1, ceil(log2(ceil(m / s))))`, and the
    /// smallest irreducible polynomial of degree `2s` as modulus.
    pub fn derive(m: usize, l: usize) -> Result<Self, HashError> {
        if l == 0 || m < l || m < 2 {
            return Err(HashError::Params { m, l });
        }
        let s = (l + ceil_log2(ceil_log2(m))).max(2);
        if 2 * s > field::MAX_DEGREE as usize {
            return Err(HashError::BlockTooWide(s));
        }
        let depth = ceil_log2(m.div_ceil(s)).max(1);
        Ok(Self {
            m,
            l,
            s,
            depth,
            field: BinaryField::canonical(2 * s as u32),
        })
    }

    pub fn input_bits(&self) -> usize {
        self.m
    }

    pub fn output_bits(&self) -> usize {
        self.l
    }

    pub fn block_bits(&self) -> usize {
        self.s
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn field(&self) -> &BinaryField {
        &self.field
    }

    /// Width of one field element, `2s`.
    pub fn element_bits(&self) -> usize {
        2 * self.s
    }

    /// Key description length `4 s d`.
    pub fn key_bits(&self) -> usize {
        4 * self.s * self.depth
    }

    /// Blocks after padding: `2^d`.
    pub fn padded_blocks(&self) -> usize {
        1 << self.depth
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LevelKey {
    pub a: u128,
    pub b: u128,
}

/// One member of the family: a `(a, b)` pair per tree level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HashKey {
    levels: SmallVec<[LevelKey; 4]>,
}

impl HashKey {
    pub fn new(params: &HashParams, levels: &[LevelKey]) -> Result<Self, HashError> {
        if levels.is_empty() {
            return Err(HashError::EmptyKey);
        }
        if levels.len() != params.depth {
            return Err(HashError::Length {
                expected: params.depth,
                got: levels.len(),
            });
        }
        let mask = params.field.mask();
        if levels.iter().any(|k| k.a & !mask != 0 || k.b & !mask != 0) {
            return Err(HashError::Length {
                expected: params.element_bits(),
                got: 128,
            });
        }
        Ok(Self {
            levels: SmallVec::from_slice(levels),
        })
    }

    pub fn levels(&self) -> &[LevelKey] {
        &self.levels
    }

    /// The key whose big-endian bit description equals `index`; used to enumerate key spaces.
    pub fn from_index(params: &HashParams, index: u128) -> Self {
        let w = params.element_bits();
        let mask = params.field.mask();
        let total = params.key_bits();
        let levels = (0..params.depth)
            .map(|j| {
                let shift_a = total - (2 * j + 1) * w;
                let shift_b = total - (2 * j + 2) * w;
                LevelKey {
                    a: index.checked_shr(shift_a as u32).unwrap_or(0) & mask,
                    b: index.checked_shr(shift_b as u32).unwrap_or(0) & mask,
                }
            })
            .collect();
        Self { levels }
    }

    /// Level pairs in order, `a` then `b`, each `2s` bits big-endian.
    pub fn to_bits(&self, params: &HashParams) -> BitString {
        let w = params.element_bits();
        let mut out = BitString::new();
        for k in &self.levels {
            out.append(&BitString::from_uint(k.a, w));
            out.append(&BitString::from_uint(k.b, w));
        }
        out
    }

    pub fn from_bits(params: &HashParams, bits: &BitString) -> Result<Self, HashError> {
        if bits.is_empty() {
            return Err(HashError::EmptyKey);
        }
        if bits.len() != params.key_bits() {
            return Err(HashError::Length {
                expected: params.key_bits(),
                got: bits.len(),
            });
        }
        let w = params.element_bits();
        let levels = (0..params.depth)
            .map(|j| LevelKey {
                a: bits.uint_at(2 * j * w, w),
                b: bits.uint_at((2 * j + 1) * w, w),
            })
            .collect();
        Ok(Self { levels })
    }

    /// Key wire format: the key bits in the core bit-string encoding.
    pub fn serialize(&self, params: &HashParams) -> Vec<u8> {
        self.to_bits(params).serialize()
    }

    pub fn deserialize(params: &HashParams, bytes: &[u8]) -> Result<Self, HashError> {
        Self::from_bits(params, &BitString::deserialize(bytes)?)
    }
}

#[inline]
fn compress(field: &BinaryField, s: usize, key: LevelKey, x: u128) -> u128 {
    (field.mul(key.a, x) ^ key.b) >> s
}

/// Top `s` bits of `a * x + b` in GF(2^{2s}).
pub fn inner_hash(
    a: &BitString,
    b: &BitString,
    x: &BitString,
    params: &HashParams,
) -> Result<BitString, HashError> {
    let w = params.element_bits();
    for v in [a, b, x] {
        if v.len() != w {
            return Err(HashError::Length {
                expected: w,
                got: v.len(),
            });
        }
    }
    let key = LevelKey {
        a: a.to_uint(),
        b: b.to_uint(),
    };
    Ok(BitString::from_uint(
        compress(&params.field, params.s, key, x.to_uint()),
        params.s,
    ))
}

/// Draws `d` independent uniform level keys.
pub fn sample_key(params: &HashParams, stream: &mut RandomStream) -> HashKey {
    HashKey::from_bits(params, &stream.bits(params.key_bits())).expect("width matches by construction")
}

/// Splits an `m`-bit input into `2^d` zero-padded `s`-bit blocks.
pub fn input_blocks(params: &HashParams, input: &BitString) -> Result<Vec<u128>, HashError> {
    if input.len() != params.m {
        return Err(HashError::Length {
            expected: params.m,
            got: input.len(),
        });
    }
    let s = params.s;
    Ok((0..params.padded_blocks())
        .map(|j| {
            let start = j * s;
            if start >= params.m {
                0
            } else {
                input.uint_at(start, s)
            }
        })
        .collect())
}

/// Evaluates the tree over pre-split blocks, returning the `l`-bit digest as an integer.
pub fn evaluate_blocks(key: &HashKey, blocks: &[u128], params: &HashParams) -> u128 {
    debug_assert_eq!(blocks.len(), params.padded_blocks());
    let s = params.s;
    let mut layer: SmallVec<[u128; 16]> = SmallVec::from_slice(blocks);
    for level in key.levels.iter() {
        let half = layer.len() / 2;
        if half >= 16 {
            let by_a = params.field.mul_table(level.a);
            for k in 0..half {
                let x = (layer[2 * k] << s) | layer[2 * k + 1];
                layer[k] = (by_a.mul(x) ^ level.b) >> s;
            }
        } else {
            for k in 0..half {
                let x = (layer[2 * k] << s) | layer[2 * k + 1];
                layer[k] = compress(&params.field, s, *level, x);
            }
        }
        layer.truncate(half);
    }
    layer[0] >> (s - params.l)
}

pub fn evaluate(key: &HashKey, input: &BitString, params: &HashParams) -> Result<BitString, HashError> {
    if key.levels.len() != params.depth {
        return Err(HashError::Length {
            expected: params.depth,
            got: key.levels.len(),
        });
    }
    let blocks = input_blocks(params, input)?;
    Ok(BitString::from_uint(
        evaluate_blocks(key, &blocks, params),
        params.l,
    ))
}

/// Exact probability over every key that `c1 ^ h(a1) == c2 ^ h(a2)`.
pub fn masked_collision_probability(
    params: &HashParams,
    a1: &BitString,
    c1: &BitString,
    a2: &BitString,
    c2: &BitString,
) -> Result<BigRational, HashError> {
    let bits = params.key_bits();
    if bits > MAX_ENUMERABLE_KEY_BITS {
        return Err(HashError::KeySpaceTooLarge {
            bits,
            limit: MAX_ENUMERABLE_KEY_BITS,
        });
    }
    for c in [c1, c2] {
        if c.len() != params.l {
            return Err(HashError::Length {
                expected: params.l,
                got: c.len(),
            });
        }
    }
    let blocks1 = input_blocks(params, a1)?;
    let blocks2 = input_blocks(params, a2)?;
    let mask = c1.to_uint() ^ c2.to_uint();
    let total = 1u128 << bits;
    let hits = (0..total)
        .filter(|&i| {
            let key = HashKey::from_index(params, i);
            evaluate_blocks(&key, &blocks1, params) ^ evaluate_blocks(&key, &blocks2, params)
                == mask
        })
        .count();
    Ok(BigRational::new(BigInt::from(hits), BigInt::from(total)))
}
