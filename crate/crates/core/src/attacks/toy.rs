use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::AttackError;

pub type Symbol = u64;

/// Joint message-and-coin states a toy may declare.
pub const MAX_TOY_STATES: u64 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    #[serde(rename = "S")]
    Sender,
    #[serde(rename = "R")]
    Receiver,
}

impl Role {
    pub fn other(self) -> Role {
        match self {
            Role::Sender => Role::Receiver,
            Role::Receiver => Role::Sender,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Sender => "S",
            Role::Receiver => "R",
        })
    }
}

/// What one round carries: an optional public symbol and one slot per wire. `None` on a wire
/// means nothing arrived (not sent, or blocked).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Traffic {
    #[serde(default)]
    pub public: Option<Symbol>,
    pub wires: Vec<Option<Symbol>>,
}

impl Traffic {
    pub fn wires_only(wires: Vec<Option<Symbol>>) -> Self {
        Self { public: None, wires }
    }

    pub fn public(public: Symbol, n: usize) -> Self {
        Self {
            public: Some(public),
            wires: vec![None; n],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundSpec {
    pub initiator: Role,
    pub uses_public: bool,
}

/// `f(history, coin, message)`; receivers get message 0.
pub type RoundFn = Arc<dyn Fn(&[Traffic], Symbol, Symbol) -> Traffic + Send + Sync>;
pub type DecodeFn = Arc<dyn Fn(&[Traffic], Symbol) -> Symbol + Send + Sync>;

#[derive(Clone)]
enum RoundTable {
    /// Outputs per history, indexed by `coin * messages + message`.
    Explicit(HashMap<Vec<Traffic>, Vec<Traffic>>),
    Computed(RoundFn),
}

#[derive(Clone)]
enum DecoderTable {
    Explicit(HashMap<Vec<Traffic>, Vec<Symbol>>),
    Computed(DecodeFn),
}

/// A protocol given as round functions `f_1..f_r` and a decoder `g` over finite spaces.
#[derive(Clone)]
pub struct ToyProtocol {
    name: String,
    n: usize,
    t: usize,
    messages: u64,
    sender_coins: u64,
    receiver_coins: u64,
    schedule: Vec<RoundSpec>,
    rounds: Vec<RoundTable>,
    decoder: DecoderTable,
}

impl fmt::Debug for ToyProtocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ToyProtocol")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("t", &self.t)
            .field("messages", &self.messages)
            .field("schedule", &self.schedule)
            .finish_non_exhaustive()
    }
}

/// Declarative form, one entry per point of each function's domain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToySpec {
    pub name: String,
    pub n: usize,
    pub t: usize,
    pub messages: u64,
    pub sender_coins: u64,
    pub receiver_coins: u64,
    pub schedule: Vec<RoundSpec>,
    pub rounds: Vec<Vec<RoundEntry>>,
    pub decoder: Vec<DecoderEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundEntry {
    pub history: Vec<Traffic>,
    pub coin: Symbol,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<Symbol>,
    pub output: Traffic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderEntry {
    pub history: Vec<Traffic>,
    pub coin: Symbol,
    pub output: Symbol,
}

/// Symbols a round can put on the public channel and on the wires.
#[derive(Debug, Clone, Default)]
struct Range {
    public: BTreeSet<Option<Symbol>>,
    wires: BTreeSet<Symbol>,
}

impl Range {
    fn add(&mut self, t: &Traffic) {
        self.public.insert(t.public);
        self.wires.extend(t.wires.iter().flatten());
    }

    /// Every traffic a recipient can see: any public value in range, and on each wire any
    /// symbol in range or nothing.
    fn received(&self, n: usize) -> Vec<Traffic> {
        let slot: Vec<Option<Symbol>> = std::iter::once(None)
            .chain(self.wires.iter().map(|&s| Some(s)))
            .collect();
        let mut wires: Vec<Vec<Option<Symbol>>> = vec![Vec::new()];
        for _ in 0..n {
            wires = wires
                .into_iter()
                .flat_map(|w| {
                    slot.iter().map(move |&s| {
                        let mut w = w.clone();
                        w.push(s);
                        w
                    })
                })
                .collect();
        }
        self.public
            .iter()
            .flat_map(|&public| {
                wires.iter().map(move |w| Traffic {
                    public,
                    wires: w.clone(),
                })
            })
            .collect()
    }
}

fn product(prefixes: Vec<Vec<Traffic>>, options: &[Traffic]) -> Vec<Vec<Traffic>> {
    prefixes
        .into_iter()
        .flat_map(|h| {
            options.iter().map(move |o| {
                let mut h = h.clone();
                h.push(o.clone());
                h
            })
        })
        .collect()
}

fn invalid(msg: impl Into<String>) -> AttackError {
    AttackError::InvalidToy(msg.into())
}

/// Builds a toy from closures, either keeping them or tabulating them over their domains.
pub struct ToyBuilder {
    name: String,
    n: usize,
    t: usize,
    messages: u64,
    sender_coins: u64,
    receiver_coins: u64,
    schedule: Vec<RoundSpec>,
    rounds: Vec<RoundFn>,
    decoder: Option<DecodeFn>,
}

impl ToyBuilder {
    pub fn new(name: &str, n: usize, t: usize, messages: u64, sender_coins: u64, receiver_coins: u64) -> Self {
        Self {
            name: name.to_string(),
            n,
            t,
            messages,
            sender_coins,
            receiver_coins,
            schedule: Vec::new(),
            rounds: Vec::new(),
            decoder: None,
        }
    }

    pub fn round<F>(mut self, initiator: Role, uses_public: bool, f: F) -> Self
    where
        F: Fn(&[Traffic], Symbol, Symbol) -> Traffic + Send + Sync + 'static,
    {
        self.schedule.push(RoundSpec { initiator, uses_public });
        self.rounds.push(Arc::new(f));
        self
    }

    pub fn decoder<F>(mut self, g: F) -> Self
    where
        F: Fn(&[Traffic], Symbol) -> Symbol + Send + Sync + 'static,
    {
        self.decoder = Some(Arc::new(g));
        self
    }

    fn shell(&self) -> Result<ToyProtocol, AttackError> {
        Ok(ToyProtocol {
            name: self.name.clone(),
            n: self.n,
            t: self.t,
            messages: self.messages,
            sender_coins: self.sender_coins,
            receiver_coins: self.receiver_coins,
            schedule: self.schedule.clone(),
            rounds: Vec::new(),
            decoder: DecoderTable::Explicit(HashMap::new()),
        })
    }

    /// Keeps the closures as they are. Only the schedule and the sizes are validated.
    pub fn computed(self) -> Result<ToyProtocol, AttackError> {
        let decoder = self.decoder.clone().ok_or_else(|| invalid("no decoder"))?;
        let mut toy = self.shell()?;
        toy.rounds = self.rounds.into_iter().map(RoundTable::Computed).collect();
        toy.decoder = DecoderTable::Computed(decoder);
        toy.validate_shape()?;
        Ok(toy)
    }

    /// Evaluates every closure on its whole domain and keeps only the tables.
    pub fn tabulate(self) -> Result<ToyProtocol, AttackError> {
        let decoder = self.decoder.clone().ok_or_else(|| invalid("no decoder"))?;
        let mut toy = self.shell()?;
        toy.validate_shape()?;
        let mut ranges: Vec<Range> = Vec::new();
        for (j, f) in self.rounds.iter().enumerate() {
            let role = toy.schedule[j].initiator;
            let (coins, messages) = toy.role_space(role);
            let mut table = HashMap::new();
            let mut range = Range::default();
            for h in toy.histories(role, j, &ranges) {
                let mut outs = Vec::with_capacity((coins * messages) as usize);
                for coin in 0..coins {
                    for msg in 0..messages {
                        let out = f(&h, coin, msg);
                        range.add(&out);
                        outs.push(out);
                    }
                }
                table.insert(h, outs);
            }
            ranges.push(range);
            toy.rounds.push(RoundTable::Explicit(table));
        }
        let mut table = HashMap::new();
        for h in toy.histories(Role::Receiver, toy.schedule.len(), &ranges) {
            let outs = (0..toy.receiver_coins).map(|c| decoder(&h, c)).collect();
            table.insert(h, outs);
        }
        toy.decoder = DecoderTable::Explicit(table);
        toy.validate()?;
        Ok(toy)
    }
}

impl ToyProtocol {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn messages(&self) -> u64 {
        self.messages
    }

    pub fn schedule(&self) -> &[RoundSpec] {
        &self.schedule
    }

    pub fn coins(&self, role: Role) -> u64 {
        match role {
            Role::Sender => self.sender_coins,
            Role::Receiver => self.receiver_coins,
        }
    }

    pub fn is_explicit(&self) -> bool {
        self.rounds.iter().all(|r| matches!(r, RoundTable::Explicit(_)))
            && matches!(self.decoder, DecoderTable::Explicit(_))
    }

    /// `|M| * |C_S| * |C_R|`.
    pub fn joint_states(&self) -> u128 {
        self.messages as u128 * self.sender_coins as u128 * self.receiver_coins as u128
    }

    fn role_space(&self, role: Role) -> (u64, u64) {
        match role {
            Role::Sender => (self.sender_coins, self.messages),
            Role::Receiver => (self.receiver_coins, 1),
        }
    }

    /// All histories `role` can hold before round `before`, given the ranges of earlier rounds.
    fn histories(&self, role: Role, before: usize, ranges: &[Range]) -> Vec<Vec<Traffic>> {
        let mut out = vec![Vec::new()];
        for (k, spec) in self.schedule[..before].iter().enumerate() {
            if spec.initiator != role {
                out = product(out, &ranges[k].received(self.n));
            }
        }
        out
    }

    fn validate_shape(&self) -> Result<(), AttackError> {
        if self.n == 0 || self.t == 0 || self.t > self.n {
            return Err(invalid(format!("need 1 <= t <= n, got n = {}, t = {}", self.n, self.t)));
        }
        if self.messages == 0 || self.sender_coins == 0 || self.receiver_coins == 0 {
            return Err(invalid("message and coin spaces must be non-empty"));
        }
        if self.joint_states() > MAX_TOY_STATES as u128 {
            return Err(invalid(format!(
                "{} joint message and coin states, limit {MAX_TOY_STATES}",
                self.joint_states()
            )));
        }
        match self.schedule.last() {
            None => return Err(invalid("empty schedule")),
            Some(s) if s.initiator != Role::Sender => {
                return Err(invalid("the last round must be sent by S"));
            }
            _ => {}
        }
        if !self.rounds.is_empty() && self.rounds.len() != self.schedule.len() {
            return Err(invalid("one round function per scheduled round"));
        }
        Ok(())
    }

    /// Shape, sizes and, for tables, totality over the declared domain and well-formed outputs.
    pub fn validate(&self) -> Result<(), AttackError> {
        self.validate_shape()?;
        let mut ranges: Vec<Range> = Vec::new();
        for (j, table) in self.rounds.iter().enumerate() {
            let RoundTable::Explicit(map) = table else {
                return Ok(());
            };
            let spec = self.schedule[j];
            let (coins, messages) = self.role_space(spec.initiator);
            let mut range = Range::default();
            for h in self.histories(spec.initiator, j, &ranges) {
                let outs = map
                    .get(&h)
                    .ok_or_else(|| invalid(format!("round {} undefined on history {h:?}", j + 1)))?;
                if outs.len() as u64 != coins * messages {
                    return Err(invalid(format!("round {} has {} outputs for history {h:?}", j + 1, outs.len())));
                }
                for out in outs {
                    if out.wires.len() != self.n {
                        return Err(invalid(format!("round {} output has {} wires", j + 1, out.wires.len())));
                    }
                    if out.public.is_some() != spec.uses_public {
                        return Err(invalid(format!("round {} public part disagrees with the schedule", j + 1)));
                    }
                    range.add(out);
                }
            }
            ranges.push(range);
        }
        let DecoderTable::Explicit(map) = &self.decoder else {
            return Ok(());
        };
        for h in self.histories(Role::Receiver, self.schedule.len(), &ranges) {
            let outs = map
                .get(&h)
                .ok_or_else(|| invalid(format!("decoder undefined on history {h:?}")))?;
            if outs.len() as u64 != self.receiver_coins {
                return Err(invalid(format!("decoder has {} outputs for history {h:?}", outs.len())));
            }
            if let Some(m) = outs.iter().find(|&&m| m >= self.messages) {
                return Err(invalid(format!("decoder outputs {m}, outside the message space")));
            }
        }
        Ok(())
    }

    /// `f_round(history, coin[, message])`.
    pub fn eval(&self, round: usize, history: &[Traffic], coin: Symbol, message: Symbol) -> Result<Traffic, AttackError> {
        let (_, messages) = self.role_space(self.schedule[round].initiator);
        match &self.rounds[round] {
            RoundTable::Computed(f) => Ok(f(history, coin, message)),
            RoundTable::Explicit(map) => map
                .get(history)
                .and_then(|outs| outs.get((coin * messages + message) as usize))
                .cloned()
                .ok_or_else(|| AttackError::Undefined {
                    what: format!("round {}", round + 1),
                    history: format!("{history:?}"),
                }),
        }
    }

    /// `g(history, coin)`.
    pub fn decode(&self, history: &[Traffic], coin: Symbol) -> Result<Symbol, AttackError> {
        match &self.decoder {
            DecoderTable::Computed(g) => Ok(g(history, coin)),
            DecoderTable::Explicit(map) => map
                .get(history)
                .and_then(|outs| outs.get(coin as usize))
                .copied()
                .ok_or_else(|| AttackError::Undefined {
                    what: "decoder".into(),
                    history: format!("{history:?}"),
                }),
        }
    }

    pub fn from_spec(spec: ToySpec) -> Result<ToyProtocol, AttackError> {
        let mut rounds = Vec::with_capacity(spec.rounds.len());
        if spec.rounds.len() != spec.schedule.len() {
            return Err(invalid("one round table per scheduled round"));
        }
        for (j, entries) in spec.rounds.into_iter().enumerate() {
            let role = spec.schedule[j].initiator;
            let (coins, messages) = match role {
                Role::Sender => (spec.sender_coins, spec.messages),
                Role::Receiver => (spec.receiver_coins, 1),
            };
            let mut slots: HashMap<Vec<Traffic>, Vec<Option<Traffic>>> = HashMap::new();
            for e in entries {
                let msg = match (role, e.message) {
                    (Role::Sender, Some(m)) if m < messages => m,
                    (Role::Receiver, None) => 0,
                    _ => return Err(invalid(format!("round {} entry has a bad message field", j + 1))),
                };
                if e.coin >= coins {
                    return Err(invalid(format!("round {} entry coin {} out of range", j + 1, e.coin)));
                }
                let row = slots
                    .entry(e.history)
                    .or_insert_with(|| vec![None; (coins * messages) as usize]);
                let slot = &mut row[(e.coin * messages + msg) as usize];
                if slot.is_some() {
                    return Err(invalid(format!("round {} entry defined twice", j + 1)));
                }
                *slot = Some(e.output);
            }
            let mut table = HashMap::with_capacity(slots.len());
            for (h, row) in slots {
                let outs: Option<Vec<Traffic>> = row.into_iter().collect();
                let outs = outs.ok_or_else(|| invalid(format!("round {} undefined for some coin on {h:?}", j + 1)))?;
                table.insert(h, outs);
            }
            rounds.push(RoundTable::Explicit(table));
        }
        let mut slots: HashMap<Vec<Traffic>, Vec<Option<Symbol>>> = HashMap::new();
        for e in spec.decoder {
            if e.coin >= spec.receiver_coins {
                return Err(invalid(format!("decoder entry coin {} out of range", e.coin)));
            }
            let row = slots
                .entry(e.history)
                .or_insert_with(|| vec![None; spec.receiver_coins as usize]);
            if row[e.coin as usize].replace(e.output).is_some() {
                return Err(invalid("decoder entry defined twice"));
            }
        }
        let mut decoder = HashMap::with_capacity(slots.len());
        for (h, row) in slots {
            let outs: Option<Vec<Symbol>> = row.into_iter().collect();
            decoder.insert(h, outs.ok_or_else(|| invalid("decoder undefined for some coin"))?);
        }
        let toy = ToyProtocol {
            name: spec.name,
            n: spec.n,
            t: spec.t,
            messages: spec.messages,
            sender_coins: spec.sender_coins,
            receiver_coins: spec.receiver_coins,
            schedule: spec.schedule,
            rounds,
            decoder: DecoderTable::Explicit(decoder),
        };
        toy.validate()?;
        Ok(toy)
    }

    pub fn from_json(json: &str) -> Result<ToyProtocol, AttackError> {
        Self::from_spec(serde_json::from_str(json)?)
    }

    /// The tables in a canonical order; `None` for computed toys.
    pub fn to_spec(&self) -> Option<ToySpec> {
        let mut rounds = Vec::with_capacity(self.rounds.len());
        for (j, table) in self.rounds.iter().enumerate() {
            let RoundTable::Explicit(map) = table else {
                return None;
            };
            let role = self.schedule[j].initiator;
            let (_, messages) = self.role_space(role);
            let mut keys: Vec<&Vec<Traffic>> = map.keys().collect();
            keys.sort();
            let mut entries = Vec::new();
            for h in keys {
                for (i, out) in map[h].iter().enumerate() {
                    let i = i as u64;
                    entries.push(RoundEntry {
                        history: h.clone(),
                        coin: i / messages,
                        message: (role == Role::Sender).then_some(i % messages),
                        output: out.clone(),
                    });
                }
            }
            rounds.push(entries);
        }
        let DecoderTable::Explicit(map) = &self.decoder else {
            return None;
        };
        let mut keys: Vec<&Vec<Traffic>> = map.keys().collect();
        keys.sort();
        let decoder = keys
            .into_iter()
            .flat_map(|h| {
                map[h].iter().enumerate().map(move |(c, &output)| DecoderEntry {
                    history: h.clone(),
                    coin: c as u64,
                    output,
                })
            })
            .collect();
        Some(ToySpec {
            name: self.name.clone(),
            n: self.n,
            t: self.t,
            messages: self.messages,
            sender_coins: self.sender_coins,
            receiver_coins: self.receiver_coins,
            schedule: self.schedule.clone(),
            rounds,
            decoder,
        })
    }
}

/// Required parts of a round output. Unset fields are unconstrained.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Constraint {
    pub public: Option<Option<Symbol>>,
    pub wires: Vec<(usize, Option<Symbol>)>,
}

impl Constraint {
    pub fn public(p: Option<Symbol>) -> Self {
        Self {
            public: Some(p),
            wires: Vec::new(),
        }
    }

    pub fn matches(&self, out: &Traffic) -> bool {
        self.public.is_none_or(|p| out.public == p)
            && self.wires.iter().all(|&(i, w)| out.wires.get(i) == Some(&w))
    }
}

/// Every coin of the round's initiator whose output on `history` (and `message`, for the
/// sender) satisfies `constraint`, ascending. May be empty.
pub fn omega_search(
    toy: &ToyProtocol,
    round: usize,
    history: &[Traffic],
    message: Symbol,
    constraint: &Constraint,
) -> Result<Vec<Symbol>, AttackError> {
    if round >= toy.schedule.len() {
        return Err(invalid(format!("no round {}", round + 1)));
    }
    let role = toy.schedule[round].initiator;
    let mut out = Vec::new();
    for coin in 0..toy.coins(role) {
        if constraint.matches(&toy.eval(round, history, coin, message)?) {
            out.push(coin);
        }
    }
    Ok(out)
}
