//! Exhaustive privacy checking at toy parameters.
//!
//! For every adversary coin `c_A` the checker enumerates every message, every sender pad and
//! every receiver key, and compares the adversary's view distributions for every pair of
//! messages. The view is `(c_A, V1, V2, V3)`: the pads sent on the corrupted wires, the
//! receiver's broadcast and the sender's broadcast. Anything else the adversary sees is a
//! function of these.
//!
//! `V1` and the receiver keys appear verbatim in the view and their distribution does not depend
//! on the message, so the distance splits exactly into a weighted sum over `(V1, keys)` groups.
//! Inside a group only the honest pads and the message vary, and the per-message counts are
//! compared as integers.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use super::pmf::statistical_distance;
use super::AnalysisError;
use crate::bits::BitString;
use crate::channels::adversaries::{Blocking, Passive, Replace, WireChoice};
use crate::channels::{
    run_execution, Adversary, Direction, Outgoing, Party, PartyError, RoundTraffic, WireMessage,
};
use crate::hashing::{evaluate_blocks, input_blocks, HashKey, HashParams};
use crate::params::ProtocolParams;
use crate::protocol::{Pads, Pi1Receiver, Pi1Sender, PI1_SCHEDULE};
use crate::random::RandomStream;
use crate::scalar::serialize_exact;
use crate::{Exact, ExactPmf};

/// Per adversary coin, at most `2^MAX_LOG2_SPACE` joint (message, sender, receiver) outcomes.
pub const MAX_LOG2_SPACE: usize = 36;

/// Digest tables and view codes must fit in `2^MAX_LOG2_TABLE` entries.
pub const MAX_LOG2_TABLE: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PrivacyStrategy {
    /// Read the corrupted wires, change nothing.
    Eavesdrop,
    /// Block the corrupted wires.
    Block,
    /// Replace each corrupted round-one payload with a value fixed by the adversary's coins.
    Substitute,
}

impl PrivacyStrategy {
    pub const ALL: [PrivacyStrategy; 3] = [
        PrivacyStrategy::Eavesdrop,
        PrivacyStrategy::Block,
        PrivacyStrategy::Substitute,
    ];
}

impl fmt::Display for PrivacyStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrivacyStrategy::Eavesdrop => "eavesdrop",
            PrivacyStrategy::Block => "block",
            PrivacyStrategy::Substitute => "substitute",
        })
    }
}

impl FromStr for PrivacyStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "eavesdrop" | "passive" => Ok(PrivacyStrategy::Eavesdrop),
            "block" => Ok(PrivacyStrategy::Block),
            "substitute" => Ok(PrivacyStrategy::Substitute),
            _ => Err(format!("unknown privacy strategy {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PrivacyTarget {
    Pi1,
    /// Sends the message in the clear on wire 0.
    Cleartext,
}

impl FromStr for PrivacyTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pi1" => Ok(PrivacyTarget::Pi1),
            "cleartext" => Ok(PrivacyTarget::Cleartext),
            _ => Err(format!("unknown protocol {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ViewMode {
    /// Grouped enumeration of the reduced view.
    Reduced,
    /// Full executions through the channel simulator; the view is the simulator's adversary view.
    Raw,
}

/// A deterministic adversary: which wires it holds and, when substituting, what it sends.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct AdversaryCoins {
    pub corrupted: Vec<usize>,
    pub replacement: Vec<u128>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstCase {
    pub coins: AdversaryCoins,
    pub m0: String,
    pub m1: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrivacyReport {
    pub target: PrivacyTarget,
    pub strategy: PrivacyStrategy,
    pub mode: ViewMode,
    pub n: usize,
    pub t: usize,
    pub m: usize,
    pub l: usize,
    pub key_bits: usize,
    pub adversary_coins: usize,
    /// log2 of the outcomes enumerated per adversary coin.
    pub log2_space: usize,
    #[serde(serialize_with = "serialize_exact")]
    pub max_distance: Exact,
    pub max_distance_f64: f64,
    pub worst: Option<WorstCase>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivacyConfig {
    pub params: ProtocolParams,
    pub strategy: PrivacyStrategy,
    pub target: PrivacyTarget,
    pub mode: ViewMode,
    /// Restrict the corrupted set; `None` tries every `t`-subset.
    pub corrupted: Option<Vec<usize>>,
}

impl PrivacyConfig {
    pub fn new(params: ProtocolParams, strategy: PrivacyStrategy) -> Self {
        Self {
            params,
            strategy,
            target: PrivacyTarget::Pi1,
            mode: ViewMode::Reduced,
            corrupted: None,
        }
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Every adversary coin for the strategy, corrupted sets in lexicographic order.
pub fn adversary_coins(config: &PrivacyConfig) -> Result<Vec<AdversaryCoins>, AnalysisError> {
    let p = &config.params;
    let sets = match &config.corrupted {
        Some(set) => {
            let mut set = set.clone();
            set.sort_unstable();
            set.dedup();
            if set.len() > p.t || set.iter().any(|&w| w >= p.n) {
                return Err(AnalysisError::Corrupted(set));
            }
            vec![set]
        }
        None => subsets(p.n, p.t),
    };
    let pw = p.wire_payload_bits();
    let mut out = Vec::new();
    for set in sets {
        match config.strategy {
            PrivacyStrategy::Substitute => {
                let bits = set.len() * pw;
                if bits > MAX_LOG2_TABLE {
                    return Err(AnalysisError::SpaceTooLarge { log2_size: bits });
                }
                for x in 0..1u128 << bits {
                    let replacement = (0..set.len())
                        .map(|q| (x >> ((set.len() - 1 - q) * pw)) & ((1 << pw) - 1))
                        .collect();
                    out.push(AdversaryCoins {
                        corrupted: set.clone(),
                        replacement,
                    });
                }
            }
            _ => out.push(AdversaryCoins {
                corrupted: set,
                replacement: Vec::new(),
            }),
        }
    }
    Ok(out)
}

/// Precomputed digests for every key and every `R`.
struct Tables {
    n: usize,
    m: usize,
    l: usize,
    pw: usize,
    k: usize,
    digest: Vec<u32>,
}

impl Tables {
    fn new(params: &ProtocolParams) -> Result<Self, AnalysisError> {
        let hash = HashParams::derive(params.m, params.l)?;
        let (m, k) = (params.m, hash.key_bits());
        if k + m > MAX_LOG2_TABLE || params.l > 32 {
            return Err(AnalysisError::SpaceTooLarge { log2_size: k + m });
        }
        let mut digest = vec![0u32; 1 << (k + m)];
        for key in 0..1u128 << k {
            let key_v = HashKey::from_index(&hash, key);
            for r in 0..1u128 << m {
                let blocks = input_blocks(&hash, &BitString::from_uint(r, m))?;
                digest[((key as usize) << m) | r as usize] = evaluate_blocks(&key_v, &blocks, &hash) as u32;
            }
        }
        Ok(Self {
            n: params.n,
            m,
            l: params.l,
            pw: params.wire_payload_bits(),
            k,
            digest,
        })
    }

    fn m_mask(&self) -> u128 {
        (1 << self.m) - 1
    }

    /// `r ⊕ h_key(R)` for a payload `r ∥ R`.
    #[inline]
    fn tag(&self, key: usize, payload: u128) -> u32 {
        let r = (payload >> self.m) as u32;
        r ^ self.digest[(key << self.m) | (payload & self.m_mask()) as usize]
    }

    /// What arrives on corrupted wire number `q` of the coins.
    fn delivered(&self, strategy: PrivacyStrategy, coins: &AdversaryCoins, q: usize, sent: u128) -> Option<u128> {
        match strategy {
            PrivacyStrategy::Eavesdrop => Some(sent),
            PrivacyStrategy::Block => None,
            PrivacyStrategy::Substitute => Some(coins.replacement[q]),
        }
    }
}

/// Per-`c_A` numerators of `2 * Δ` for every message pair, over a common denominator.
struct PairSums {
    sums: Vec<u128>,
}

fn pair_index(a: usize, b: usize, messages: usize) -> usize {
    a * messages + b
}

impl Tables {
    /// Grouped enumeration for one adversary coin.
    fn pair_sums(&self, strategy: PrivacyStrategy, coins: &AdversaryCoins) -> PairSums {
        let (n, m, l, pw, k) = (self.n, self.m, self.l, self.pw, self.k);
        let corrupted = &coins.corrupted;
        let honest: Vec<usize> = (0..n).filter(|i| !corrupted.contains(i)).collect();
        let (jc, hc) = (corrupted.len(), honest.len());
        let messages = 1usize << m;
        let pw_mask = (1u128 << pw) - 1;
        let k_mask = (1usize << k) - 1;
        let m_mask = self.m_mask();

        let partial = (0..1u128 << (jc * pw))
            .into_par_iter()
            .map(|v1| {
                let sent: Vec<u128> = (0..jc).map(|q| (v1 >> ((jc - 1 - q) * pw)) & pw_mask).collect();
                let delivered: Vec<Option<u128>> =
                    (0..jc).map(|q| self.delivered(strategy, coins, q, sent[q])).collect();
                // Per wire: Some(q) for corrupted wire number q, None for honest.
                let role: Vec<Option<usize>> = (0..n).map(|i| corrupted.iter().position(|&j| j == i)).collect();
                let surviving: Vec<usize> = (0..n)
                    .filter(|&i| role[i].is_none_or(|q| delivered[q].is_some()))
                    .collect();
                let w = surviving.len();
                let code_bits = w * l + n + m;
                let scale = (n - w) * k;
                let mut counts = vec![0u32; messages << code_bits];
                let mut his: Vec<u128> = Vec::with_capacity(1 << (hc * pw));
                let mut sums = vec![0u128; messages * messages];
                let tag_shift = |q: usize| m + n + (w - 1 - q) * l;
                let v_bit = |i: usize| 1u128 << (m + n - 1 - i);

                for keys in 0..1usize << (w * k) {
                    let key_of = |q: usize| (keys >> ((w - 1 - q) * k)) & k_mask;
                    let mut fixed: u128 = 0;
                    let mut honest_slots = Vec::with_capacity(hc);
                    for (q, &i) in surviving.iter().enumerate() {
                        match role[i] {
                            Some(cq) => {
                                let d = delivered[cq].expect("surviving");
                                let key = key_of(q);
                                let received_tag = self.tag(key, d);
                                fixed |= (received_tag as u128) << tag_shift(q);
                                if self.tag(key, sent[cq]) == received_tag {
                                    fixed |= v_bit(i);
                                    fixed ^= sent[cq] & m_mask;
                                }
                            }
                            None => honest_slots.push((q, i, key_of(q))),
                        }
                    }
                    his.clear();
                    for hp in 0..1u128 << (hc * pw) {
                        let mut code = fixed;
                        for (h, &(q, i, key)) in honest_slots.iter().enumerate() {
                            let p = (hp >> ((hc - 1 - h) * pw)) & pw_mask;
                            let received_tag = self.tag(key, p);
                            code |= (received_tag as u128) << tag_shift(q);
                            if self.tag(key, p) == received_tag {
                                code |= v_bit(i);
                                code ^= p & m_mask;
                            }
                        }
                        for msg in 0..messages {
                            counts[(msg << code_bits) | (code ^ msg as u128) as usize] += 1;
                        }
                        his.push(code & !m_mask);
                    }
                    his.sort_unstable();
                    his.dedup();
                    for &hi in &his {
                        for c in 0..messages {
                            let code = (hi | c as u128) as usize;
                            let first = counts[code];
                            let differs = (1..messages).any(|a| counts[(a << code_bits) | code] != first);
                            if differs {
                                for a in 0..messages {
                                    for b in a + 1..messages {
                                        let ca = counts[(a << code_bits) | code] as i64;
                                        let cb = counts[(b << code_bits) | code] as i64;
                                        sums[pair_index(a, b, messages)] += (ca - cb).unsigned_abs() as u128 * (1u128 << scale);
                                    }
                                }
                            }
                            for a in 0..messages {
                                counts[(a << code_bits) | code] = 0;
                            }
                        }
                    }
                }
                sums
            })
            .reduce(
                || vec![0u128; messages * messages],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        PairSums { sums: partial }
    }
}

fn check_space(params: &ProtocolParams, tables: &Tables) -> Result<usize, AnalysisError> {
    let n = params.n;
    let log2 = n * params.wire_payload_bits() + n * tables.k + params.m;
    let code_bits = n * params.l + n + params.m;
    if log2 > MAX_LOG2_SPACE {
        return Err(AnalysisError::SpaceTooLarge { log2_size: log2 });
    }
    if code_bits + params.m > MAX_LOG2_TABLE {
        return Err(AnalysisError::SpaceTooLarge {
            log2_size: code_bits + params.m,
        });
    }
    Ok(log2)
}

struct Tracker {
    max: Exact,
    worst: Option<WorstCase>,
}

impl Tracker {
    fn new() -> Self {
        Self {
            max: Exact::zero(),
            worst: None,
        }
    }

    fn offer(&mut self, d: Exact, coins: &AdversaryCoins, m0: u128, m1: u128, m: usize) {
        if self.worst.is_none() || d > self.max {
            self.max = d;
            self.worst = Some(WorstCase {
                coins: coins.clone(),
                m0: BitString::from_uint(m0, m).to_string(),
                m1: BitString::from_uint(m1, m).to_string(),
            });
        }
    }
}

fn reduced_pi1(config: &PrivacyConfig, coins_list: &[AdversaryCoins]) -> Result<(Tracker, usize, usize), AnalysisError> {
    let p = &config.params;
    let tables = Tables::new(p)?;
    let log2 = check_space(p, &tables)?;
    let messages = 1usize << p.m;
    let mut tracker = Tracker::new();
    for coins in coins_list {
        let sums = tables.pair_sums(config.strategy, coins);
        // Denominator: 2 * |V1| * |all keys| * |honest pads|.
        let den = BigInt::from(1) << (1 + p.n * tables.pw + p.n * tables.k);
        for a in 0..messages {
            for b in a + 1..messages {
                let d = Exact::new(BigInt::from(sums.sums[pair_index(a, b, messages)]), den.clone());
                tracker.offer(d, coins, a as u128, b as u128, p.m);
            }
        }
    }
    Ok((tracker, log2, tables.k))
}

fn adversary_for(strategy: PrivacyStrategy, coins: &AdversaryCoins, pw: usize) -> Box<dyn Adversary + Send> {
    let wires = WireChoice::Fixed(coins.corrupted.clone());
    match strategy {
        PrivacyStrategy::Eavesdrop => Box::new(Passive { wires }),
        PrivacyStrategy::Block => Box::new(Blocking { wires }),
        PrivacyStrategy::Substitute => Box::new(Replace {
            wires,
            payloads: coins.replacement.iter().map(|&x| BitString::from_uint(x, pw)).collect(),
        }),
    }
}

fn view_key(view: &crate::channels::AdversaryView) -> String {
    serde_json::to_string(view).expect("views serialize")
}

/// Enumerates full executions and compares the simulator's adversary views.
fn raw_pi1(config: &PrivacyConfig, coins_list: &[AdversaryCoins]) -> Result<(Tracker, usize, usize), AnalysisError> {
    let p = &config.params;
    let hash = HashParams::derive(p.m, p.l)?;
    let (pw, k, n) = (p.wire_payload_bits(), hash.key_bits(), p.n);
    let log2 = n * pw + n * k + p.m;
    if log2 > MAX_LOG2_TABLE + 2 {
        return Err(AnalysisError::SpaceTooLarge { log2_size: log2 });
    }
    let stream = RandomStream::new(p.seed);
    let messages = 1u128 << p.m;
    let mut tracker = Tracker::new();
    for coins in coins_list {
        let pmfs = (0..messages)
            .map(|msg| {
                let message = BitString::from_uint(msg, p.m);
                let counts = (0..1u128 << (n * pw))
                    .into_par_iter()
                    .map(|all| -> Result<BTreeMap<String, u128>, AnalysisError> {
                        let pads: Vec<Pads> = (0..n)
                            .map(|i| {
                                let payload = BitString::from_uint((all >> ((n - 1 - i) * pw)) & ((1 << pw) - 1), pw);
                                Pads::parse(p, &payload).expect("width")
                            })
                            .collect();
                        let run = |keys: Vec<HashKey>| {
                            let mut sender = Pi1Sender::with_pads(p, message.clone(), pads.clone());
                            let mut receiver = Pi1Receiver::with_keys(p, keys);
                            let mut adv = adversary_for(config.strategy, coins, pw);
                            let res = run_execution(&PI1_SCHEDULE, &mut sender, &mut receiver, adv.as_mut(), p, &stream)?;
                            Ok::<_, AnalysisError>((view_key(&res.view), receiver.keys_requested()))
                        };
                        let (_, w) = run(vec![HashKey::from_index(&hash, 0)])?;
                        let mut local = BTreeMap::new();
                        for keys in 0..1u128 << (w * k) {
                            let list = (0..w)
                                .map(|q| HashKey::from_index(&hash, (keys >> ((w - 1 - q) * k)) & ((1 << k) - 1)))
                                .collect();
                            let (view, _) = run(list)?;
                            *local.entry(view).or_insert(0) += 1u128 << ((n - w) * k);
                        }
                        Ok(local)
                    })
                    .try_reduce(BTreeMap::new, |mut a, b| {
                        for (key, c) in b {
                            *a.entry(key).or_insert(0) += c;
                        }
                        Ok(a)
                    })?;
                Ok(ExactPmf::from_counts(counts)?)
            })
            .collect::<Result<Vec<_>, AnalysisError>>()?;
        for a in 0..pmfs.len() {
            for b in a + 1..pmfs.len() {
                let d = statistical_distance(&pmfs[a], &pmfs[b])?;
                tracker.offer(d, coins, a as u128, b as u128, p.m);
            }
        }
    }
    Ok((tracker, log2, k))
}

struct ClearSender {
    message: BitString,
    n: usize,
}

struct ClearReceiver(Option<BitString>);

impl Party for ClearSender {
    fn initiate(&mut self, _: usize, _: &mut RandomStream) -> Result<Outgoing, PartyError> {
        let mut wires = vec![WireMessage::Absent; self.n];
        wires[0] = WireMessage::Delivered(self.message.clone());
        Ok(Outgoing { wires, public: None })
    }

    fn receive(&mut self, _: usize, _: &RoundTraffic, _: &mut RandomStream) -> Result<(), PartyError> {
        Ok(())
    }

    fn output(&self) -> Option<BitString> {
        Some(self.message.clone())
    }
}

impl Party for ClearReceiver {
    fn initiate(&mut self, _: usize, _: &mut RandomStream) -> Result<Outgoing, PartyError> {
        Err("the receiver never initiates".into())
    }

    fn receive(&mut self, _: usize, traffic: &RoundTraffic, _: &mut RandomStream) -> Result<(), PartyError> {
        self.0 = traffic.wires[0].payload().cloned();
        Ok(())
    }

    fn output(&self) -> Option<BitString> {
        self.0.clone()
    }
}

/// The strawman: one round, the message in the clear on wire 0, other wires idle.
fn raw_cleartext(config: &PrivacyConfig, coins_list: &[AdversaryCoins]) -> Result<(Tracker, usize, usize), AnalysisError> {
    let p = &config.params;
    if p.m > MAX_LOG2_TABLE {
        return Err(AnalysisError::SpaceTooLarge { log2_size: p.m });
    }
    let stream = RandomStream::new(p.seed);
    let mut tracker = Tracker::new();
    for coins in coins_list {
        let pmfs = (0..1u128 << p.m)
            .map(|msg| {
                let mut sender = ClearSender {
                    message: BitString::from_uint(msg, p.m),
                    n: p.n,
                };
                let mut receiver = ClearReceiver(None);
                let mut adv = adversary_for(config.strategy, coins, p.wire_payload_bits());
                let res = run_execution(
                    &[Direction::SenderToReceiver],
                    &mut sender,
                    &mut receiver,
                    adv.as_mut(),
                    p,
                    &stream,
                )?;
                Ok(ExactPmf::point(view_key(&res.view)))
            })
            .collect::<Result<Vec<_>, AnalysisError>>()?;
        for a in 0..pmfs.len() {
            for b in a + 1..pmfs.len() {
                let d = statistical_distance(&pmfs[a], &pmfs[b])?;
                tracker.offer(d, coins, a as u128, b as u128, p.m);
            }
        }
    }
    Ok((tracker, p.m, 0))
}

/// Maximum over adversary coins and message pairs of the view distance.
pub fn exhaustive_privacy_check(config: &PrivacyConfig) -> Result<PrivacyReport, AnalysisError> {
    let p = &config.params;
    p.validate()?;
    let coins_list = adversary_coins(config)?;
    let (tracker, log2_space, key_bits) = match (config.target, config.mode) {
        (PrivacyTarget::Pi1, ViewMode::Reduced) => reduced_pi1(config, &coins_list)?,
        (PrivacyTarget::Pi1, ViewMode::Raw) => raw_pi1(config, &coins_list)?,
        (PrivacyTarget::Cleartext, _) => raw_cleartext(config, &coins_list)?,
    };
    let max = tracker.max.clone();
    Ok(PrivacyReport {
        target: config.target,
        strategy: config.strategy,
        mode: config.mode,
        n: p.n,
        t: p.t,
        m: p.m,
        l: p.l,
        key_bits,
        adversary_coins: coins_list.len(),
        log2_space,
        max_distance_f64: crate::scalar::Probability::to_f64(&max),
        passed: max.is_zero(),
        max_distance: max,
        worst: tracker.worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{receiver_round2_with, sender_round3, SenderState};

    /// The reduced view for one full assignment of coins; used to cross-check the grouped
    /// enumeration against the protocol implementation.
    #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
    struct ReducedView {
        v1: Vec<u128>,
        b: Vec<bool>,
        keys: Vec<usize>,
        tags: Vec<u32>,
        v: Vec<bool>,
        c: u128,
    }

    impl Tables {
        fn reduced_view(
            &self,
            strategy: PrivacyStrategy,
            coins: &AdversaryCoins,
            pads: &[u128],
            keys: &[usize],
            message: u128,
        ) -> ReducedView {
            let mut delivered: Vec<Option<u128>> = pads.iter().map(|&p| Some(p)).collect();
            for (q, &j) in coins.corrupted.iter().enumerate() {
                delivered[j] = self.delivered(strategy, coins, q, pads[j]);
            }
            let b: Vec<bool> = delivered.iter().map(Option::is_none).collect();
            let mut tags = Vec::new();
            let mut v = vec![false; self.n];
            let mut c = message;
            let mut next_key = 0;
            for i in 0..self.n {
                if let Some(d) = delivered[i] {
                    let key = keys[next_key];
                    next_key += 1;
                    let received_tag = self.tag(key, d);
                    tags.push(received_tag);
                    if self.tag(key, pads[i]) == received_tag {
                        v[i] = true;
                        c ^= pads[i] & self.m_mask();
                    }
                }
            }
            ReducedView {
                v1: coins.corrupted.iter().map(|&j| pads[j]).collect(),
                b,
                keys: keys[..next_key].to_vec(),
                tags,
                v,
                c,
            }
        }
    }

    fn params(m: usize, l: usize) -> ProtocolParams {
        ProtocolParams::new(2, 1, m, l, 0).unwrap()
    }

    #[test]
    fn coin_enumeration() {
        let mut c = PrivacyConfig::new(params(2, 1), PrivacyStrategy::Substitute);
        assert_eq!(adversary_coins(&c).unwrap().len(), 2 * 8);
        c.corrupted = Some(vec![1]);
        let coins = adversary_coins(&c).unwrap();
        assert_eq!(coins.len(), 8);
        assert!(coins.iter().all(|x| x.corrupted == vec![1]));
        c.strategy = PrivacyStrategy::Block;
        assert_eq!(adversary_coins(&c).unwrap().len(), 1);
        c.corrupted = Some(vec![0, 1]);
        assert!(adversary_coins(&c).is_err());
        assert_eq!(subsets(4, 2).len(), 6);
    }

    /// The table-driven view agrees with the protocol implementation on every coin assignment.
    #[test]
    fn reduced_view_matches_protocol() {
        let p = params(2, 1);
        let tables = Tables::new(&p).unwrap();
        let hash = HashParams::derive(2, 1).unwrap();
        let mut rng = RandomStream::new(42);
        for strategy in PrivacyStrategy::ALL {
            let config = PrivacyConfig::new(p, strategy);
            for coins in adversary_coins(&config).unwrap() {
                for _ in 0..40 {
                    let pads: Vec<u128> = (0..2).map(|_| rng.below(8) as u128).collect();
                    let keys: Vec<usize> = (0..2).map(|_| rng.below(256) as usize).collect();
                    let msg = rng.below(4) as u128;
                    let view = tables.reduced_view(strategy, &coins, &pads, &keys, msg);

                    let pad_structs: Vec<Pads> = pads
                        .iter()
                        .map(|&x| Pads::parse(&p, &BitString::from_uint(x, 3)).unwrap())
                        .collect();
                    let sender = SenderState::from_pads(&p, &BitString::from_uint(msg, 2), pad_structs).unwrap();
                    let mut wires = sender.wire_payloads();
                    for (q, &j) in coins.corrupted.iter().enumerate() {
                        wires[j] = match tables.delivered(strategy, &coins, q, pads[j]) {
                            Some(x) => WireMessage::Delivered(BitString::from_uint(x, 3)),
                            None => WireMessage::Blocked,
                        };
                    }
                    let mut next = 0;
                    let (_, msg2) = receiver_round2_with(&p, &wires, |_| {
                        next += 1;
                        HashKey::from_index(&hash, keys[next - 1] as u128)
                    })
                    .unwrap();
                    let msg3 = sender_round3(&sender, &msg2).unwrap();
                    assert_eq!(msg2.b.iter().collect::<Vec<_>>(), view.b);
                    assert_eq!(msg2.entries.len(), view.keys.len());
                    for (q, (key, tag)) in msg2.entries.iter().enumerate() {
                        assert_eq!(*key, HashKey::from_index(&hash, view.keys[q] as u128));
                        assert_eq!(tag.to_uint() as u32, view.tags[q]);
                    }
                    assert_eq!(msg3.v.iter().collect::<Vec<_>>(), view.v);
                    assert_eq!(msg3.c.to_uint(), view.c);
                }
            }
        }
    }

    /// Direct Pmf construction over the full reduced view, without grouping.
    fn ungrouped(p: &ProtocolParams, strategy: PrivacyStrategy) -> Exact {
        let tables = Tables::new(p).unwrap();
        let config = PrivacyConfig::new(*p, strategy);
        let mut max = Exact::zero();
        for coins in adversary_coins(&config).unwrap() {
            let pmfs: Vec<ExactPmf<ReducedView>> = (0..4u128)
                .map(|msg| {
                    let mut counts = BTreeMap::new();
                    for all in 0..64u128 {
                        let pads = [all >> 3, all & 7];
                        let probe = tables.reduced_view(strategy, &coins, &pads, &[0, 0], msg);
                        let w = probe.keys.len();
                        for keys in 0..1usize << (8 * w) {
                            let ks: Vec<usize> = (0..w).map(|q| (keys >> (8 * (w - 1 - q))) & 255).collect();
                            let v = tables.reduced_view(strategy, &coins, &pads, &ks, msg);
                            *counts.entry(v).or_insert(0) += 1u128 << (8 * (2 - w));
                        }
                    }
                    ExactPmf::from_counts(counts).unwrap()
                })
                .collect();
            for a in 0..4 {
                for b in a + 1..4 {
                    let d = statistical_distance(&pmfs[a], &pmfs[b]).unwrap();
                    if d > max {
                        max = d;
                    }
                }
            }
        }
        max
    }

    #[test]
    fn grouped_equals_ungrouped_for_block() {
        let p = params(2, 1);
        assert!(ungrouped(&p, PrivacyStrategy::Block).is_zero());
        let r = exhaustive_privacy_check(&PrivacyConfig::new(p, PrivacyStrategy::Block)).unwrap();
        assert!(r.passed);
        assert_eq!(r.key_bits, 8);
    }

    #[test]
    fn raw_mode_agrees_for_block() {
        let mut c = PrivacyConfig::new(params(2, 1), PrivacyStrategy::Block);
        c.mode = ViewMode::Raw;
        let r = exhaustive_privacy_check(&c).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn cleartext_leaks() {
        let mut c = PrivacyConfig::new(params(2, 1), PrivacyStrategy::Eavesdrop);
        c.target = PrivacyTarget::Cleartext;
        let r = exhaustive_privacy_check(&c).unwrap();
        assert_eq!(r.max_distance, Exact::from_integer(1.into()));
        assert!(!r.passed);
        assert_eq!(r.worst.unwrap().coins.corrupted, vec![0]);
        c.corrupted = Some(vec![1]);
        assert!(exhaustive_privacy_check(&c).unwrap().passed);
    }

    /// With every wire corrupted the sender's blinding is fully visible and the grouped
    /// enumeration must report distance 1.
    #[test]
    fn grouped_checker_detects_leak() {
        let p = params(2, 1);
        let tables = Tables::new(&p).unwrap();
        let coins = AdversaryCoins {
            corrupted: vec![0, 1],
            replacement: vec![],
        };
        let sums = tables.pair_sums(PrivacyStrategy::Eavesdrop, &coins);
        let den = 1u128 << (1 + 2 * 3 + 2 * 8);
        for a in 0..4 {
            for b in a + 1..4 {
                assert_eq!(sums.sums[pair_index(a, b, 4)], den);
            }
        }
    }

    #[test]
    fn oversized_space_rejected() {
        let p = ProtocolParams::new(2, 1, 64, 1, 0).unwrap();
        assert!(matches!(
            exhaustive_privacy_check(&PrivacyConfig::new(p, PrivacyStrategy::Eavesdrop)),
            Err(AnalysisError::SpaceTooLarge { .. })
        ));
    }
}
