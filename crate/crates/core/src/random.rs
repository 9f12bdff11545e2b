//! Seedable, splittable randomness.
//!
//! Every stream is a ChaCha20 generator keyed by a SHA-256 derivation path rooted at a 64-bit
//! seed. Splitting hashes the parent key with a label and an index, so sub-streams for sender,
//! receiver and adversary of execution `i` are independent of each other and of draw order.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::bits::BitString;

pub struct RandomStream {
    seed: u64,
    key: [u8; 32],
    counter: u64,
    rng: ChaCha20Rng,
    record: Option<BitString>,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        let mut h = Sha256::new();
        h.update(b"smtpd/root");
        h.update(seed.to_be_bytes());
        Self::from_key(seed, h.finalize().into())
    }

    fn from_key(seed: u64, key: [u8; 32]) -> Self {
        Self {
            seed,
            key,
            counter: 0,
            rng: ChaCha20Rng::from_seed(key),
            record: None,
        }
    }

    /// An independent child stream identified by `(label, index)`. Does not advance `self`.
    pub fn split(&self, label: &str, index: u64) -> RandomStream {
        let mut h = Sha256::new();
        h.update(self.key);
        h.update((label.len() as u64).to_be_bytes());
        h.update(label.as_bytes());
        h.update(index.to_be_bytes());
        Self::from_key(self.seed, h.finalize().into())
    }

    /// The sub-stream for `role` in execution number `execution` under `seed`.
    pub fn for_execution(seed: u64, role: &str, execution: u64) -> RandomStream {
        RandomStream::new(seed).split("execution", execution).split(role, 0)
    }

    /// Keeps a copy of every bit drawn from now on.
    pub fn recording(mut self) -> Self {
        self.record = Some(BitString::new());
        self
    }

    pub fn recorded(&self) -> Option<&BitString> {
        self.record.as_ref()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of bits drawn so far.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn bits(&mut self, len: usize) -> BitString {
        let mut buf = vec![0u8; len.div_ceil(8)];
        self.rng.fill_bytes(&mut buf);
        let out = BitString::from_bytes(&buf, len);
        self.counter += len as u64;
        if let Some(rec) = self.record.as_mut() {
            rec.append(&out);
        }
        out
    }

    /// Uniform integer in `0..bound`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let v = self.rng.gen_range(0..bound);
        let width = 64 - (bound - 1).leading_zeros() as usize;
        self.counter += width as u64;
        if let Some(rec) = self.record.as_mut() {
            rec.append(&BitString::from_uint(u128::from(v), width));
        }
        v
    }

    /// A uniformly random `k`-subset of `0..n`, sorted.
    pub fn subset(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        let mut chosen = pool[..k].to_vec();
        chosen.sort_unstable();
        chosen
    }
}
