//! Lower-bound adversaries run exhaustively against toy protocols.
//!
//! A toy protocol is a list of round functions `f_j(history, coin[, message])` and a decoder
//! `g(history, coin)` over small finite spaces. Every attack enumerates all messages and coins
//! of both parties and of the adversary, so the reported probabilities are exact.
//!
//! Toys load from JSON:
//!
//! ```json
//! {
//!   "name": "otp2", "n": 2, "t": 1,
//!   "messages": 4, "sender_coins": 1, "receiver_coins": 32,
//!   "schedule": [{"initiator": "R", "uses_public": true},
//!                {"initiator": "S", "uses_public": true}],
//!   "rounds": [
//!     [{"history": [], "coin": 0, "output": {"public": 0, "wires": [0, 0]}}, ...],
//!     [{"history": [{"public": 0, "wires": [0, null]}], "coin": 0, "message": 3,
//!       "output": {"public": 3, "wires": [null, null]}}, ...]
//!   ],
//!   "decoder": [{"history": [...], "coin": 0, "output": 3}, ...]
//! }
//! ```
//!
//! A history lists what the party received in the rounds it did not send, in order. `null` on a
//! wire means nothing arrived. `message` appears exactly on the sender's entries. Every function
//! must be defined on every history built from the symbols earlier rounds can emit, with each
//! wire slot possibly `null`.

mod builtin;
mod toy;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::scalar::{serialize_exact, serialize_exact_opt};
use crate::Exact;

pub use builtin::{builtin, BUILTIN_TOYS};
pub use toy::{
    omega_search, Constraint, DecodeFn, DecoderEntry, Role, RoundEntry, RoundFn, RoundSpec, Symbol, ToyBuilder,
    ToyProtocol, ToySpec, Traffic, MAX_TOY_STATES,
};

/// Executions one attack may enumerate, counting the adversary's coins.
pub const MAX_EXECUTIONS: u64 = 1 << 26;

#[derive(Debug, Error)]
pub enum AttackError {
    #[error("invalid toy protocol: {0}")]
    InvalidToy(String),
    #[error("malformed toy description: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{what} is undefined on history {history}")]
    Undefined { what: String, history: String },
    #[error("schedule {got} does not match the required {expected}")]
    Schedule { expected: &'static str, got: String },
    #[error("the attack splits the wires in halves and needs n = 2t, got n = {n}, t = {t}")]
    HalfSplit { n: usize, t: usize },
    #[error("the public channel is used in {count} rounds, at most one allowed")]
    PublicInvocations { count: usize },
    #[error("round {round} uses the public channel from {initiator}, not from the invoker {invoker}")]
    WrongInvoker { round: usize, initiator: Role, invoker: Role },
    #[error("{executions} executions exceed the enumeration limit {MAX_EXECUTIONS}")]
    SpaceTooLarge { executions: u128 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Attack {
    /// Two rounds `R -> S`, `S -> R`; the adversary plays a second receiver.
    Swap,
    /// Two rounds `S -> R`, `S -> R`; the adversary blocks half and decodes the other half.
    Oneway,
    /// Public channel used only by the sender; the adversary plays a second receiver.
    ImpersonateS,
    /// Public channel used only by the receiver; the adversary plays a second sender.
    ImpersonateR,
}

impl Attack {
    pub const ALL: [Attack; 4] = [Attack::Swap, Attack::Oneway, Attack::ImpersonateS, Attack::ImpersonateR];

    pub fn name(self) -> &'static str {
        match self {
            Attack::Swap => "swap",
            Attack::Oneway => "oneway",
            Attack::ImpersonateS => "impersonate-s",
            Attack::ImpersonateR => "impersonate-r",
        }
    }
}

impl fmt::Display for Attack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Attack {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Attack::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown attack {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub description: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackReport {
    pub toy: String,
    pub attack: String,
    pub n: usize,
    pub t: usize,
    pub messages: u64,
    pub executions: u64,
    /// `Pr[M_A = M_S]`.
    #[serde(serialize_with = "serialize_exact")]
    pub p_guess: Exact,
    /// `Pr[M_R != M_S]`.
    #[serde(serialize_with = "serialize_exact")]
    pub p_fail: Exact,
    #[serde(serialize_with = "serialize_exact")]
    pub p_success: Exact,
    /// `Pr[M_R = M_S | M_A != M_S]`, absent when `M_A = M_S` always.
    #[serde(serialize_with = "serialize_exact_opt")]
    pub p_success_given_distinct: Option<Exact>,
    #[serde(serialize_with = "serialize_exact_opt")]
    pub p_fail_given_distinct: Option<Exact>,
    pub bounds: Vec<BoundCheck>,
    /// Every execution was paired with its swapped execution and the pair checked.
    pub bijection_verified: bool,
    pub pairs_checked: u64,
    pub passed: bool,
}

/// The coins of one execution. The adversary corrupts the first half of the wires when
/// `half = 0`, the second when `half = 1`, and runs a second copy of the `fake` role with
/// `(fake_message, fake_coin)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Coins {
    message: Symbol,
    sender: Symbol,
    receiver: Symbol,
    half: u8,
    fake_message: Symbol,
    fake_coin: Symbol,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Run {
    m_r: Symbol,
    m_a: Symbol,
    sender_view: Vec<Traffic>,
    receiver_view: Vec<Traffic>,
    fake_view: Vec<Traffic>,
}

/// One execution with the adversary in the middle. Traffic sent by the role it duplicates
/// reaches the other party from the real copy on honest wires and from the fake copy on
/// corrupted ones; traffic sent by the other party reaches the real copy on honest wires only
/// and the fake copy on corrupted wires only. The public channel is never touched.
fn mitm(toy: &ToyProtocol, fake: Role, c: &Coins) -> Result<Run, AttackError> {
    let n = toy.n();
    let t = toy.t();
    let corrupted = |i: usize| if c.half == 0 { i < t } else { i >= n - t };
    let mut sender_view = Vec::new();
    let mut receiver_view = Vec::new();
    let mut fake_view = Vec::new();
    for (j, spec) in toy.schedule().iter().enumerate() {
        if spec.initiator == fake {
            let (real_out, fake_out) = match fake {
                Role::Sender => (
                    toy.eval(j, &sender_view, c.sender, c.message)?,
                    toy.eval(j, &fake_view, c.fake_coin, c.fake_message)?,
                ),
                Role::Receiver => (
                    toy.eval(j, &receiver_view, c.receiver, 0)?,
                    toy.eval(j, &fake_view, c.fake_coin, 0)?,
                ),
            };
            let got = Traffic {
                public: real_out.public,
                wires: (0..n)
                    .map(|i| if corrupted(i) { fake_out.wires[i] } else { real_out.wires[i] })
                    .collect(),
            };
            match fake {
                Role::Sender => receiver_view.push(got),
                Role::Receiver => sender_view.push(got),
            }
        } else {
            let out = match fake {
                Role::Sender => toy.eval(j, &receiver_view, c.receiver, 0)?,
                Role::Receiver => toy.eval(j, &sender_view, c.sender, c.message)?,
            };
            let split = |keep: bool| Traffic {
                public: out.public,
                wires: (0..n).map(|i| if corrupted(i) == keep { out.wires[i] } else { None }).collect(),
            };
            let (real, forged) = (split(false), split(true));
            fake_view.push(forged);
            match fake {
                Role::Sender => sender_view.push(real),
                Role::Receiver => receiver_view.push(real),
            }
        }
    }
    let m_r = toy.decode(&receiver_view, c.receiver)?;
    let m_a = match fake {
        Role::Receiver => toy.decode(&fake_view, c.fake_coin)?,
        Role::Sender => c.fake_message,
    };
    Ok(Run {
        m_r,
        m_a,
        sender_view,
        receiver_view,
        fake_view,
    })
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    total: u64,
    success: u64,
    guess: u64,
    distinct: u64,
    success_distinct: u64,
}

impl Counts {
    fn add(&mut self, o: &Counts) {
        self.total += o.total;
        self.success += o.success;
        self.guess += o.guess;
        self.distinct += o.distinct;
        self.success_distinct += o.success_distinct;
    }
}

/// Counts grouped by the extra denominator of the execution weight.
#[derive(Debug, Clone, Default)]
struct Tally {
    by_weight: BTreeMap<u64, Counts>,
    pairs: u64,
    bijection_ok: bool,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        for (w, c) in other.by_weight {
            self.by_weight.entry(w).or_default().add(&c);
        }
        self.pairs += other.pairs;
        self.bijection_ok &= other.bijection_ok;
        self
    }

    fn probability(&self, base: u64, pick: impl Fn(&Counts) -> u64) -> Exact {
        self.by_weight.iter().fold(Exact::zero(), |acc, (&w, c)| {
            acc + Exact::new(BigInt::from(pick(c)), BigInt::from(base) * BigInt::from(w))
        })
    }
}

/// The adversary's coin choices for a given execution prefix, all equally likely.
trait Strategy: Sync {
    fn fake(&self) -> Role;
    /// `(fake_message, fake_coin)` pairs available to the adversary.
    fn choices(&self, toy: &ToyProtocol, c: &Coins) -> Result<Vec<(Symbol, Symbol)>, AttackError>;
    /// The swapped execution of `c`.
    fn swap(&self, c: &Coins) -> Coins;
    /// The pair relation: which views must coincide between `E` and its swap.
    fn pair_holds(&self, e: &Run, hat: &Run) -> bool;
}

struct FakeReceiver {
    /// Restrict the fake coin to receivers whose first-round public part matches.
    omega: bool,
}

impl Strategy for FakeReceiver {
    fn fake(&self) -> Role {
        Role::Receiver
    }

    fn choices(&self, toy: &ToyProtocol, c: &Coins) -> Result<Vec<(Symbol, Symbol)>, AttackError> {
        let coins = if self.omega {
            let observed = toy.eval(0, &[], c.receiver, 0)?;
            omega_search(toy, 0, &[], 0, &Constraint::public(observed.public))?
        } else {
            (0..toy.coins(Role::Receiver)).collect()
        };
        Ok(coins.into_iter().map(|r| (0, r)).collect())
    }

    fn swap(&self, c: &Coins) -> Coins {
        Coins {
            receiver: c.fake_coin,
            fake_coin: c.receiver,
            half: c.half ^ 1,
            ..*c
        }
    }

    fn pair_holds(&self, e: &Run, hat: &Run) -> bool {
        e.sender_view == hat.sender_view && e.receiver_view == hat.fake_view && e.m_r == hat.m_a
    }
}

struct FakeSender;

impl Strategy for FakeSender {
    fn fake(&self) -> Role {
        Role::Sender
    }

    fn choices(&self, toy: &ToyProtocol, _: &Coins) -> Result<Vec<(Symbol, Symbol)>, AttackError> {
        let s = toy.coins(Role::Sender);
        Ok((0..toy.messages()).flat_map(|m| (0..s).map(move |c| (m, c))).collect())
    }

    fn swap(&self, c: &Coins) -> Coins {
        Coins {
            message: c.fake_message,
            sender: c.fake_coin,
            fake_message: c.message,
            fake_coin: c.sender,
            half: c.half ^ 1,
            ..*c
        }
    }

    fn pair_holds(&self, e: &Run, hat: &Run) -> bool {
        e.receiver_view == hat.receiver_view && e.sender_view == hat.fake_view && e.m_r == hat.m_r
    }
}

fn enumerate(toy: &ToyProtocol, strategy: &dyn Strategy) -> Result<(Tally, u64), AttackError> {
    let (ms, cs, cr) = (toy.messages(), toy.coins(Role::Sender), toy.coins(Role::Receiver));
    let adversary = match strategy.fake() {
        Role::Receiver => cr as u128,
        Role::Sender => ms as u128 * cs as u128,
    };
    let bound = toy.joint_states() * 2 * adversary;
    if bound > MAX_EXECUTIONS as u128 {
        return Err(AttackError::SpaceTooLarge { executions: bound });
    }
    let prefixes = ms * cs * cr * 2;
    let tally = (0..prefixes)
        .into_par_iter()
        .map(|idx| -> Result<Tally, AttackError> {
            let base = Coins {
                message: idx / (cs * cr * 2),
                sender: idx / (cr * 2) % cs,
                receiver: idx / 2 % cr,
                half: (idx % 2) as u8,
                fake_message: 0,
                fake_coin: 0,
            };
            let choices = strategy.choices(toy, &base)?;
            let weight = choices.len() as u64;
            let mut counts = Counts::default();
            let mut tally = Tally {
                bijection_ok: true,
                ..Tally::default()
            };
            for (fake_message, fake_coin) in choices {
                let c = Coins {
                    fake_message,
                    fake_coin,
                    ..base
                };
                let run = mitm(toy, strategy.fake(), &c)?;
                let hat_coins = strategy.swap(&c);
                let hat_choices = strategy.choices(toy, &hat_coins)?;
                let hat_valid = hat_choices.len() as u64 == weight
                    && hat_choices.contains(&(hat_coins.fake_message, hat_coins.fake_coin));
                let hat = mitm(toy, strategy.fake(), &hat_coins)?;
                tally.bijection_ok &= hat_valid && strategy.pair_holds(&run, &hat) && strategy.swap(&hat_coins) == c;
                tally.pairs += 1;
                let success = run.m_r == c.message;
                let distinct = run.m_a != c.message;
                counts.total += 1;
                counts.success += success as u64;
                counts.guess += !distinct as u64;
                counts.distinct += distinct as u64;
                counts.success_distinct += (success && distinct) as u64;
            }
            if counts.total > 0 {
                tally.by_weight.insert(weight, counts);
            }
            Ok(tally)
        })
        .try_reduce(
            || Tally {
                bijection_ok: true,
                ..Tally::default()
            },
            |a, b| Ok(a.merge(b)),
        )?;
    Ok((tally, prefixes))
}

fn report(toy: &ToyProtocol, attack: Attack, strategy: &dyn Strategy) -> Result<AttackReport, AttackError> {
    if toy.n() != 2 * toy.t() {
        return Err(AttackError::HalfSplit { n: toy.n(), t: toy.t() });
    }
    let (tally, prefixes) = enumerate(toy, strategy)?;
    let p_success = tally.probability(prefixes, |c| c.success);
    let p_fail = Exact::one() - &p_success;
    let p_guess = tally.probability(prefixes, |c| c.guess);
    let p_distinct = tally.probability(prefixes, |c| c.distinct);
    let (given_s, given_f) = if p_distinct.is_zero() {
        (None, None)
    } else {
        let s = tally.probability(prefixes, |c| c.success_distinct) / &p_distinct;
        (Some(s.clone()), Some(Exact::one() - s))
    };
    let m = Exact::new(BigInt::one(), BigInt::from(toy.messages()));
    let bounds = match attack {
        Attack::ImpersonateR => vec![
            BoundCheck {
                description: "P[M_R = M_S | M_A != M_S] <= P[M_R != M_S | M_A != M_S]".into(),
                holds: match (&given_s, &given_f) {
                    (Some(s), Some(f)) => s <= f,
                    _ => true,
                },
            },
            BoundCheck {
                description: "p_fail >= (1 - 1/|M|)/2".into(),
                holds: p_fail >= (Exact::one() - &m) / Exact::from_integer(2.into()),
            },
        ],
        _ => vec![
            BoundCheck {
                description: "p_guess >= p_success".into(),
                holds: p_guess >= p_success,
            },
            BoundCheck {
                description: "p_guess + p_fail >= 1 - 1/|M|".into(),
                holds: &p_guess + &p_fail >= Exact::one() - &m,
            },
        ],
    };
    let executions = tally.by_weight.values().map(|c| c.total).sum();
    let passed = tally.bijection_ok && bounds.iter().all(|b| b.holds);
    Ok(AttackReport {
        toy: toy.name().to_string(),
        attack: attack.name().to_string(),
        n: toy.n(),
        t: toy.t(),
        messages: toy.messages(),
        executions,
        p_guess,
        p_fail,
        p_success,
        p_success_given_distinct: given_s,
        p_fail_given_distinct: given_f,
        bounds,
        bijection_verified: tally.bijection_ok,
        pairs_checked: tally.pairs,
        passed,
    })
}

fn schedule_string(toy: &ToyProtocol) -> String {
    toy.schedule()
        .iter()
        .map(|s| format!("{}->{}{}", s.initiator, s.initiator.other(), if s.uses_public { "+P" } else { "" }))
        .collect::<Vec<_>>()
        .join(", ")
}

fn check_initiators(toy: &ToyProtocol, want: [Role; 2], expected: &'static str) -> Result<(), AttackError> {
    let got: Vec<Role> = toy.schedule().iter().map(|s| s.initiator).collect();
    if got != want {
        return Err(AttackError::Schedule {
            expected,
            got: schedule_string(toy),
        });
    }
    Ok(())
}

/// Two rounds, `R -> S` then `S -> R`. On corrupted wires the adversary replaces the first
/// round with the traffic of a receiver coin drawn from those that produce the same public
/// part, blocks the second round, and decodes it with that coin.
pub fn swap_attack(toy: &ToyProtocol) -> Result<AttackReport, AttackError> {
    check_initiators(toy, [Role::Receiver, Role::Sender], "R->S, S->R")?;
    report(toy, Attack::Swap, &FakeReceiver { omega: true })
}

/// Two rounds, both `S -> R`. The adversary blocks the corrupted half and decodes what it read
/// with a fresh uniform receiver coin.
pub fn swap_attack_oneway(toy: &ToyProtocol) -> Result<AttackReport, AttackError> {
    check_initiators(toy, [Role::Sender, Role::Sender], "S->R, S->R")?;
    report(toy, Attack::Oneway, &FakeReceiver { omega: false })
}

/// Blocks what the invoker sends on corrupted wires and substitutes what the other party sends
/// there with the output of a second copy of that party on fresh coins. Copying the sender also
/// draws a fresh uniform message `M_A`.
pub fn impersonation_attack(toy: &ToyProtocol, invoker: Role) -> Result<AttackReport, AttackError> {
    let public: Vec<(usize, Role)> = toy
        .schedule()
        .iter()
        .enumerate()
        .filter(|(_, s)| s.uses_public)
        .map(|(j, s)| (j + 1, s.initiator))
        .collect();
    if public.len() > 1 {
        return Err(AttackError::PublicInvocations { count: public.len() });
    }
    if let Some(&(round, initiator)) = public.iter().find(|(_, r)| *r != invoker) {
        return Err(AttackError::WrongInvoker {
            round,
            initiator,
            invoker,
        });
    }
    match invoker {
        Role::Sender => report(toy, Attack::ImpersonateS, &FakeReceiver { omega: false }),
        Role::Receiver => report(toy, Attack::ImpersonateR, &FakeSender),
    }
}

pub fn run_attack(toy: &ToyProtocol, attack: Attack) -> Result<AttackReport, AttackError> {
    match attack {
        Attack::Swap => swap_attack(toy),
        Attack::Oneway => swap_attack_oneway(toy),
        Attack::ImpersonateS => impersonation_attack(toy, Role::Sender),
        Attack::ImpersonateR => impersonation_attack(toy, Role::Receiver),
    }
}
