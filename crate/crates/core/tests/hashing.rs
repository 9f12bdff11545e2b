use num_rational::BigRational;
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use smtpd::bits::BitString;
use smtpd::hashing::oracle::{inner_pair_counts, tree_pair_counts};
use smtpd::hashing::{masked_collision_probability, sample_key, HashKey, HashParams};
use smtpd::random::RandomStream;

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[test]
fn inner_family_is_strongly_universal_at_s2() {
    let p = HashParams::derive(2, 1).unwrap();
    assert_eq!(p.block_bits(), 2);
    let stats = inner_pair_counts(&p).unwrap().stats();
    assert_eq!(stats.min_pair, ratio(1, 16));
    assert_eq!(stats.max_pair, ratio(1, 16));
}

#[test]
fn tree_bounds_at_m8_l1() {
    let p = HashParams::derive(8, 1).unwrap();
    assert_eq!((p.block_bits(), p.depth(), p.key_bits()), (3, 2, 24));
    let table = tree_pair_counts(&p).unwrap();
    let stats = table.stats();
    assert!(stats.max_pair <= ratio(1, 2), "{:?}", stats.max_pair);
    assert!(stats.max_masked_collision <= ratio(1, 1));
    let (x1, x2) = (3u64, 200u64);
    let a1 = BitString::from_uint(x1 as u128, 8);
    let a2 = BitString::from_uint(x2 as u128, 8);
    let c0 = BitString::from_uint(0, 1);
    let c1 = BitString::from_uint(1, 1);
    let direct = masked_collision_probability(&p, &a1, &c0, &a2, &c1).unwrap();
    assert_eq!(table.masked(x1, x2, 1), direct);
}

#[test]
fn tree_bounds_at_m8_l2() {
    let p = HashParams::derive(8, 2).unwrap();
    let stats = tree_pair_counts(&p).unwrap().stats();
    assert!(stats.max_pair <= ratio(1, 8));
    assert!(stats.max_masked_collision <= ratio(1, 2));
}

#[test]
fn four_bit_draws_are_uniform() {
    let mut stream = RandomStream::new(2024);
    let draws = 100_000u64;
    let mut counts = [0u64; 16];
    for _ in 0..draws {
        counts[stream.bits(4).to_uint() as usize] += 1;
    }
    let expected = draws as f64 / 16.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let critical = ChiSquared::new(15.0).unwrap().inverse_cdf(0.99);
    assert!((critical - 30.578).abs() < 1e-3);
    assert!(chi2 < critical, "chi2 = {chi2}");
}

#[test]
fn key_length_within_description_bound() {
    let ceil_log2 = |x: usize| (usize::BITS - (x - 1).leading_zeros()) as usize;
    for k in 1..=20 {
        let m = 1usize << k;
        for l in [1, 4, 8, 16, 36] {
            if l > m {
                continue;
            }
            let Ok(p) = HashParams::derive(m, l) else { continue };
            assert!(p.key_bits() <= 4 * p.block_bits() * ceil_log2(m).max(1), "m={m} l={l}");
        }
    }
}

#[test]
fn distinct_seeds_give_distinct_keys() {
    let p = HashParams::derive(64, 8).unwrap();
    let mut equal = 0;
    for i in 0..1000u64 {
        let a = sample_key(&p, &mut RandomStream::new(2 * i));
        let b = sample_key(&p, &mut RandomStream::new(2 * i + 1));
        equal += (a == b) as u32;
    }
    assert_eq!(equal, 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn key_serialization_round_trips(seed in any::<u64>(), m in 2usize..300, l in 1usize..20) {
        prop_assume!(l <= m);
        let p = HashParams::derive(m, l).unwrap();
        let key = sample_key(&p, &mut RandomStream::new(seed));
        prop_assert_eq!(key.to_bits(&p).len(), p.key_bits());
        prop_assert_eq!(HashKey::deserialize(&p, &key.serialize(&p)).unwrap(), key);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn bit_strings_round_trip(bits in prop::collection::vec(any::<bool>(), 0..200)) {
        let b = BitString::from_bits(bits);
        prop_assert_eq!(BitString::deserialize(&b.serialize()).unwrap(), b);
    }
}
