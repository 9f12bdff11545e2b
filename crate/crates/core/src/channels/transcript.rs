use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::engine::visible_at;
use super::{Direction, RoundTraffic, WireMessage};
use crate::bits::BitString;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub direction: Direction,
    pub sent: RoundTraffic,
    pub delivered: RoundTraffic,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IntegrityViolation {
    #[error("round {round}: public payload altered in transit")]
    PublicAltered { round: usize },
    #[error("round {round}: honest wire {wire} altered in transit")]
    HonestWireAltered { round: usize, wire: usize },
    #[error("{corrupted} wires corrupted with a budget of {budget}")]
    OverBudget { corrupted: usize, budget: usize },
}

/// Per-execution record of all traffic, as sent and as delivered.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub rounds: Vec<RoundRecord>,
    /// Corrupted wire -> round in which it was corrupted (0 for static corruption).
    pub corrupted: BTreeMap<usize, usize>,
    pub budget: usize,
    /// Payload bits put on the public channel by the honest parties.
    pub public_bits_sent: u64,
    /// Payload bits put on the wires by the honest parties.
    pub wire_bits_sent: u64,
}

#[derive(Serialize)]
struct Trailer<'a> {
    trailer: bool,
    corrupted: Vec<usize>,
    corrupted_at: &'a BTreeMap<usize, usize>,
    budget: usize,
    public_bits_sent: u64,
    wire_bits_sent: u64,
}

impl Transcript {
    pub(crate) fn new(budget: usize) -> Self {
        Self {
            rounds: Vec::new(),
            corrupted: BTreeMap::new(),
            budget,
            public_bits_sent: 0,
            wire_bits_sent: 0,
        }
    }

    pub(crate) fn push(&mut self, record: RoundRecord) {
        self.public_bits_sent += record.sent.public.as_ref().map_or(0, |p| p.len() as u64);
        self.wire_bits_sent += record
            .sent
            .wires
            .iter()
            .map(|w| w.payload_bits() as u64)
            .sum::<u64>();
        self.rounds.push(record);
    }

    pub(crate) fn set_corrupted(&mut self, corrupted: BTreeMap<usize, usize>) {
        self.corrupted = corrupted;
    }

    pub fn corrupted_set(&self) -> BTreeSet<usize> {
        self.corrupted.keys().copied().collect()
    }

    /// Public payloads are delivered verbatim, honest wires are untouched, and the corrupted set
    /// stays within budget.
    pub fn check_integrity(&self) -> Result<(), IntegrityViolation> {
        if self.corrupted.len() > self.budget {
            return Err(IntegrityViolation::OverBudget {
                corrupted: self.corrupted.len(),
                budget: self.budget,
            });
        }
        for rec in &self.rounds {
            if rec.sent.public != rec.delivered.public {
                return Err(IntegrityViolation::PublicAltered { round: rec.round });
            }
            let visible = visible_at(&self.corrupted, rec.round);
            for (wire, (s, d)) in rec.sent.wires.iter().zip(&rec.delivered.wires).enumerate() {
                if !visible.contains(&wire) && s != d {
                    return Err(IntegrityViolation::HonestWireAltered {
                        round: rec.round,
                        wire,
                    });
                }
            }
        }
        Ok(())
    }

    /// The part of the transcript an adversary is entitled to see: all public payloads and the
    /// sent payloads of wires corrupted by that round.
    pub fn adversary_projection(&self) -> Vec<ObservedRound> {
        self.rounds
            .iter()
            .map(|rec| {
                let visible = visible_at(&self.corrupted, rec.round);
                ObservedRound {
                    round: rec.round,
                    direction: rec.direction,
                    public: rec.sent.public.clone(),
                    wires: visible
                        .into_iter()
                        .map(|w| (w, rec.sent.wires[w].clone()))
                        .collect(),
                }
            })
            .collect()
    }

    /// JSON lines: one record per round, then a trailer with the corrupted set and counters.
    pub fn write_json_lines<W: Write>(&self, mut out: W) -> io::Result<()> {
        for rec in &self.rounds {
            serde_json::to_writer(&mut out, rec)?;
            out.write_all(b"\n")?;
        }
        let trailer = Trailer {
            trailer: true,
            corrupted: self.corrupted.keys().copied().collect(),
            corrupted_at: &self.corrupted,
            budget: self.budget,
            public_bits_sent: self.public_bits_sent,
            wire_bits_sent: self.wire_bits_sent,
        };
        serde_json::to_writer(&mut out, &trailer)?;
        out.write_all(b"\n")
    }

    pub fn to_json_lines(&self) -> String {
        let mut buf = Vec::new();
        self.write_json_lines(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }
}

/// One round as seen by the adversary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservedRound {
    pub round: usize,
    pub direction: Direction,
    pub public: Option<BitString>,
    pub wires: BTreeMap<usize, WireMessage>,
}

/// The adversary's coins and everything it observed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryView {
    pub coins: BitString,
    pub rounds: Vec<ObservedRound>,
}
