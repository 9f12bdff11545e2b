//! Exhaustive pair-probability tables for tiny parameters.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{compress, input_blocks, HashError, HashParams, LevelKey};
use crate::bits::BitString;

/// Work budget for one table, in counter updates.
const MAX_WORK: u128 = 1 << 33;

/// `count[(x1, x2), (y1, y2)]` = keys with `h(x1) = y1` and `h(x2) = y2`, for `x1 < x2`.
#[derive(Debug, Clone)]
pub struct PairCounts {
    input_bits: usize,
    output_bits: usize,
    keys: u128,
    counts: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairStats {
    pub min_pair: BigRational,
    pub max_pair: BigRational,
    /// Max over `x1 != x2` and masks `c` of `Pr[h(x1) ^ h(x2) = c]`.
    pub max_masked_collision: BigRational,
}

fn pair_index(n: u64, x1: u64, x2: u64) -> u64 {
    debug_assert!(x1 < x2 && x2 < n);
    x1 * (2 * n - x1 - 1) / 2 + (x2 - x1 - 1)
}

impl PairCounts {
    fn ratio(&self, c: u64) -> BigRational {
        BigRational::new(BigInt::from(c), BigInt::from(self.keys))
    }

    fn row(&self, x1: u64, x2: u64) -> &[u32] {
        let y = 1usize << (2 * self.output_bits);
        let i = pair_index(1 << self.input_bits, x1, x2) as usize;
        &self.counts[i * y..(i + 1) * y]
    }

    /// `Pr[h(x1) = y1 and h(x2) = y2]` for `x1 != x2`.
    pub fn pair(&self, x1: u64, x2: u64, y1: u64, y2: u64) -> BigRational {
        let (x1, x2, y1, y2) = if x1 < x2 { (x1, x2, y1, y2) } else { (x2, x1, y2, y1) };
        self.ratio(self.row(x1, x2)[(y1 << self.output_bits | y2) as usize] as u64)
    }

    /// `Pr[h(x1) ^ h(x2) = mask]` for `x1 != x2`.
    pub fn masked(&self, x1: u64, x2: u64, mask: u64) -> BigRational {
        let (x1, x2) = (x1.min(x2), x1.max(x2));
        let row = self.row(x1, x2);
        let hits: u64 = (0..1u64 << self.output_bits)
            .map(|y1| row[(y1 << self.output_bits | (y1 ^ mask)) as usize] as u64)
            .sum();
        self.ratio(hits)
    }

    pub fn stats(&self) -> PairStats {
        let y = 1usize << (2 * self.output_bits);
        let l = self.output_bits;
        let mut min = u64::MAX;
        let mut max = 0;
        let mut masked = 0;
        for row in self.counts.chunks(y) {
            for &c in row {
                min = min.min(c as u64);
                max = max.max(c as u64);
            }
            for mask in 0..1usize << l {
                let hits: u64 = (0..1usize << l).map(|y1| row[y1 << l | (y1 ^ mask)] as u64).sum();
                masked = masked.max(hits);
            }
        }
        PairStats {
            min_pair: self.ratio(min),
            max_pair: self.ratio(max),
            max_masked_collision: self.ratio(masked),
        }
    }
}

fn check_work(params: &HashParams, work: u128) -> Result<(), HashError> {
    if work > MAX_WORK {
        return Err(HashError::KeySpaceTooLarge {
            bits: params.key_bits(),
            limit: super::MAX_ENUMERABLE_KEY_BITS,
        });
    }
    Ok(())
}

/// The compression `x -> top_s(a * x + b)` on `2s`-bit inputs, over all `(a, b)`.
pub fn inner_pair_counts(params: &HashParams) -> Result<PairCounts, HashError> {
    let s = params.s;
    let w = 2 * s;
    let inputs = 1u64 << w;
    let pairs = inputs * (inputs - 1) / 2;
    let keys = 1u128 << (2 * w);
    check_work(params, keys * pairs as u128)?;
    let mut counts = vec![0u32; (pairs << (2 * s)) as usize];
    let mut out = vec![0u64; inputs as usize];
    for a in 0..1u128 << w {
        for b in 0..1u128 << w {
            let key = LevelKey { a, b };
            for (x, o) in out.iter_mut().enumerate() {
                *o = compress(&params.field, s, key, x as u128) as u64;
            }
            let mut idx = 0usize;
            for x1 in 0..inputs as usize {
                for x2 in x1 + 1..inputs as usize {
                    counts[idx << (2 * s) | (out[x1] << s | out[x2]) as usize] += 1;
                    idx += 1;
                }
            }
        }
    }
    Ok(PairCounts {
        input_bits: w,
        output_bits: s,
        keys,
        counts,
    })
}

/// The full tree `{0,1}^m -> {0,1}^l` over all keys. The first level is enumerated outermost;
/// the remaining levels are folded into a table over pairs of first-level outputs.
pub fn tree_pair_counts(params: &HashParams) -> Result<PairCounts, HashError> {
    let (m, l, s, d) = (params.m, params.l, params.s, params.depth);
    let too_large = || HashError::KeySpaceTooLarge {
        bits: params.key_bits(),
        limit: super::MAX_ENUMERABLE_KEY_BITS,
    };
    if params.key_bits() > super::MAX_ENUMERABLE_KEY_BITS || m > 12 {
        return Err(too_large());
    }
    let w = 2 * s;
    let inputs = 1u64 << m;
    let pairs = inputs * (inputs - 1) / 2;
    let y = 1usize << (2 * l);
    let mid_blocks = 1usize << (d - 1);
    let mid_bits = s * mid_blocks;
    let blocks: Vec<Vec<u128>> = (0..inputs)
        .map(|x| input_blocks(params, &BitString::from_uint(x as u128, m)))
        .collect::<Result<_, _>>()?;
    let pack = |v: &[u128]| v.iter().fold(0u128, |acc, &b| acc << s | b);
    let unpack = |z: u128| -> Vec<u128> {
        (0..mid_blocks)
            .map(|i| z >> (s * (mid_blocks - 1 - i)) & ((1 << s) - 1))
            .collect()
    };
    let compress_level = |key: LevelKey, layer: &[u128]| -> Vec<u128> {
        layer
            .chunks(2)
            .map(|p| compress(&params.field, s, key, p[0] << s | p[1]))
            .collect()
    };
    let top = |block: u128| (block >> (s - l)) as usize;

    // rest[(z1, z2) * y + (y1, y2)] over the keys of levels 2..d.
    let rest = if d > 1 {
        let mids = 1usize << mid_bits;
        let rest_levels = d - 1;
        check_work(params, (mids * mids) as u128 * (1u128 << (2 * w * rest_levels)))?;
        let mut table = vec![0u32; mids * mids * y];
        let mut out = vec![0usize; mids];
        for index in 0..1u128 << (2 * w * rest_levels) {
            let keys: Vec<LevelKey> = (0..rest_levels)
                .map(|j| {
                    let shift = 2 * w * (rest_levels - 1 - j);
                    LevelKey {
                        a: index >> (shift + w) & ((1 << w) - 1),
                        b: index >> shift & ((1 << w) - 1),
                    }
                })
                .collect();
            for (z, o) in out.iter_mut().enumerate() {
                let mut layer = unpack(z as u128);
                for &k in &keys {
                    layer = compress_level(k, &layer);
                }
                *o = top(layer[0]);
            }
            for z1 in 0..mids {
                for z2 in 0..mids {
                    table[(z1 * mids + z2) * y + (out[z1] << l | out[z2])] += 1;
                }
            }
        }
        Some((mids, table))
    } else {
        None
    };

    let per_key = if rest.is_some() { y as u128 } else { 1 };
    check_work(params, (1u128 << (2 * w)) * pairs as u128 * per_key)?;
    let mut counts = vec![0u32; pairs as usize * y];
    let mut mid = vec![0usize; inputs as usize];
    for a in 0..1u128 << w {
        for b in 0..1u128 << w {
            let key = LevelKey { a, b };
            for (x, z) in mid.iter_mut().enumerate() {
                let layer = compress_level(key, &blocks[x]);
                *z = match rest {
                    Some(_) => pack(&layer) as usize,
                    None => top(layer[0]),
                };
            }
            let mut idx = 0usize;
            for x1 in 0..inputs as usize {
                for x2 in x1 + 1..inputs as usize {
                    match &rest {
                        Some((mids, table)) => {
                            let src = &table[(mid[x1] * mids + mid[x2]) * y..][..y];
                            for (c, t) in counts[idx * y..][..y].iter_mut().zip(src) {
                                *c += t;
                            }
                        }
                        None => counts[idx * y + (mid[x1] << l | mid[x2])] += 1,
                    }
                    idx += 1;
                }
            }
        }
    }
    Ok(PairCounts {
        input_bits: m,
        output_bits: l,
        keys: 1u128 << params.key_bits(),
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashing::{evaluate, HashKey};

    #[test]
    fn pair_index_is_dense() {
        let n = 7;
        let mut seen = Vec::new();
        for x1 in 0..n {
            for x2 in x1 + 1..n {
                seen.push(pair_index(n, x1, x2));
            }
        }
        assert_eq!(seen, (0..n * (n - 1) / 2).collect::<Vec<_>>());
    }

    /// Direct enumeration through the public evaluation path.
    fn brute(params: &HashParams) -> Vec<Vec<u64>> {
        (0..1u128 << params.key_bits())
            .map(|k| {
                let key = HashKey::from_index(params, k);
                (0..1u64 << params.input_bits())
                    .map(|x| {
                        evaluate(&key, &BitString::from_uint(x as u128, params.input_bits()), params)
                            .unwrap()
                            .to_uint() as u64
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn tree_matches_brute_force() {
        for (m, l) in [(2, 1), (3, 2), (4, 1)] {
            let p = HashParams::derive(m, l).unwrap();
            let table = tree_pair_counts(&p).unwrap();
            let outs = brute(&p);
            let keys = outs.len() as i64;
            for x1 in 0..1u64 << m {
                for x2 in 0..1u64 << m {
                    if x1 == x2 {
                        continue;
                    }
                    for y1 in 0..1u64 << l {
                        for y2 in 0..1u64 << l {
                            let hits = outs.iter().filter(|o| o[x1 as usize] == y1 && o[x2 as usize] == y2).count();
                            assert_eq!(
                                table.pair(x1, x2, y1, y2),
                                BigRational::new((hits as i64).into(), keys.into())
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn refuses_large_tables() {
        let p = HashParams::derive(64, 8).unwrap();
        assert!(matches!(tree_pair_counts(&p), Err(HashError::KeySpaceTooLarge { .. })));
    }
}
