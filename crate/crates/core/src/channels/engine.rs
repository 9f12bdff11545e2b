use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use super::transcript::{AdversaryView, ObservedRound, RoundRecord, Transcript};
use super::{Direction, RoundTraffic, WireMessage};
use crate::bits::BitString;
use crate::params::ProtocolParams;
use crate::random::RandomStream;

pub type PartyError = Box<dyn std::error::Error + Send + Sync>;

/// Violations of the simulation contract. These are bugs in a party or adversary, never
/// protocol outcomes.
#[derive(Debug, Error)]
pub enum SimulationFault {
    #[error("adversary touched wire {wire}, which is not corrupted")]
    HonestWire { wire: usize },
    #[error("wire index {wire} out of range for {n} wires")]
    NoSuchWire { wire: usize, n: usize },
    #[error("corrupting wire {wire} exceeds the budget of {budget} wires")]
    BudgetExceeded { wire: usize, budget: usize },
    #[error("static adversary attempted to corrupt wire {wire} mid-run")]
    StaticCorruption { wire: usize },
    #[error("round {round}: initiator emitted {got} wire slots, expected {expected}")]
    MalformedTraffic {
        round: usize,
        got: usize,
        expected: usize,
    },
    #[error("{role} failed in round {round}: {source}")]
    Party {
        role: &'static str,
        round: usize,
        #[source]
        source: PartyError,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub enum CorruptionMode {
    /// The corrupted set is fixed before the first round.
    #[default]
    Static,
    /// Wires may be corrupted between and during rounds, up to the budget.
    Adaptive,
}

/// What a party sends when it initiates a round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outgoing {
    pub wires: Vec<WireMessage>,
    pub public: Option<BitString>,
}

/// One honest endpoint. Rounds are numbered from zero.
pub trait Party {
    /// Traffic for `round`; called only in rounds this party initiates.
    fn initiate(&mut self, round: usize, coins: &mut RandomStream) -> Result<Outgoing, PartyError>;

    /// Traffic delivered to this party in `round`.
    fn receive(
        &mut self,
        round: usize,
        traffic: &RoundTraffic,
        coins: &mut RandomStream,
    ) -> Result<(), PartyError>;

    /// The sender reports the message it sent, the receiver the message it decoded.
    fn output(&self) -> Option<BitString>;
}

/// An unbounded adversary controlling up to `t` wires.
pub trait Adversary {
    fn mode(&self) -> CorruptionMode {
        CorruptionMode::Static
    }

    /// Wires corrupted before the first round.
    fn initial_corruptions(
        &mut self,
        params: &ProtocolParams,
        coins: &mut RandomStream,
    ) -> Vec<usize>;

    /// Called once per round after the initiator has sent and before anything is delivered.
    fn intercept(
        &mut self,
        round: &mut Interception<'_>,
        coins: &mut RandomStream,
    ) -> Result<(), SimulationFault>;

    fn output(&mut self, _coins: &mut RandomStream) -> Option<BitString> {
        None
    }
}

/// The adversary's handle on one round of in-flight traffic.
pub struct Interception<'a> {
    round: usize,
    direction: Direction,
    public: Option<&'a BitString>,
    sent: &'a [WireMessage],
    in_flight: &'a mut [WireMessage],
    corrupted: &'a mut BTreeMap<usize, usize>,
    budget: usize,
    mode: CorruptionMode,
    observed: &'a mut ObservedRound,
}

impl Interception<'_> {
    pub fn round(&self) -> usize {
        self.round
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn public(&self) -> Option<&BitString> {
        self.public
    }

    pub fn wire_count(&self) -> usize {
        self.sent.len()
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn corrupted(&self) -> Vec<usize> {
        self.corrupted.keys().copied().collect()
    }

    pub fn is_corrupted(&self, wire: usize) -> bool {
        self.corrupted.contains_key(&wire)
    }

    fn check(&self, wire: usize) -> Result<(), SimulationFault> {
        if wire >= self.sent.len() {
            return Err(SimulationFault::NoSuchWire {
                wire,
                n: self.sent.len(),
            });
        }
        if !self.is_corrupted(wire) {
            return Err(SimulationFault::HonestWire { wire });
        }
        Ok(())
    }

    /// What the initiator put on a corrupted wire this round.
    pub fn observe(&self, wire: usize) -> Result<&WireMessage, SimulationFault> {
        self.check(wire)?;
        Ok(&self.sent[wire])
    }

    pub fn replace(&mut self, wire: usize, msg: WireMessage) -> Result<(), SimulationFault> {
        self.check(wire)?;
        self.in_flight[wire] = msg;
        Ok(())
    }

    pub fn block(&mut self, wire: usize) -> Result<(), SimulationFault> {
        self.replace(wire, WireMessage::Blocked)
    }

    /// Adaptive corruption. The wire's traffic becomes visible from this round on; corrupting
    /// an already corrupted wire is free.
    pub fn corrupt(&mut self, wire: usize) -> Result<(), SimulationFault> {
        if wire >= self.sent.len() {
            return Err(SimulationFault::NoSuchWire {
                wire,
                n: self.sent.len(),
            });
        }
        if self.is_corrupted(wire) {
            return Ok(());
        }
        if self.mode == CorruptionMode::Static {
            return Err(SimulationFault::StaticCorruption { wire });
        }
        if self.corrupted.len() >= self.budget {
            return Err(SimulationFault::BudgetExceeded {
                wire,
                budget: self.budget,
            });
        }
        self.corrupted.insert(wire, self.round);
        self.observed.wires.insert(wire, self.sent[wire].clone());
        Ok(())
    }
}

/// Everything an execution produced.
#[derive(Debug, Clone)]
pub struct ExecutionResult {
    pub sender_output: Option<BitString>,
    pub receiver_output: Option<BitString>,
    pub adversary_output: Option<BitString>,
    pub transcript: Transcript,
    pub view: AdversaryView,
}

fn party_fault(role: &'static str, round: usize) -> impl FnOnce(PartyError) -> SimulationFault {
    move |source| SimulationFault::Party {
        role,
        round,
        source,
    }
}

/// Runs one execution over `schedule`. Sender, receiver and adversary draw from independent
/// sub-streams of `stream`, so equal streams give equal transcripts.
pub fn run_execution<S, R, A>(
    schedule: &[Direction],
    sender: &mut S,
    receiver: &mut R,
    adversary: &mut A,
    params: &ProtocolParams,
    stream: &RandomStream,
) -> Result<ExecutionResult, SimulationFault>
where
    S: Party + ?Sized,
    R: Party + ?Sized,
    A: Adversary + ?Sized,
{
    let n = params.n;
    let mut sender_coins = stream.split("sender", 0);
    let mut receiver_coins = stream.split("receiver", 0);
    let mut adversary_coins = stream.split("adversary", 0).recording();

    let mut corrupted: BTreeMap<usize, usize> = BTreeMap::new();
    for wire in adversary.initial_corruptions(params, &mut adversary_coins) {
        if wire >= n {
            return Err(SimulationFault::NoSuchWire { wire, n });
        }
        if !corrupted.contains_key(&wire) && corrupted.len() >= params.t {
            return Err(SimulationFault::BudgetExceeded {
                wire,
                budget: params.t,
            });
        }
        corrupted.insert(wire, 0);
    }

    let mut transcript = Transcript::new(params.t);
    let mut observed_rounds = Vec::with_capacity(schedule.len());

    for (round, &direction) in schedule.iter().enumerate() {
        let outgoing = match direction {
            Direction::SenderToReceiver => sender
                .initiate(round, &mut sender_coins)
                .map_err(party_fault("sender", round))?,
            Direction::ReceiverToSender => receiver
                .initiate(round, &mut receiver_coins)
                .map_err(party_fault("receiver", round))?,
        };
        if outgoing.wires.len() != n {
            return Err(SimulationFault::MalformedTraffic {
                round,
                got: outgoing.wires.len(),
                expected: n,
            });
        }
        let sent = RoundTraffic {
            direction,
            wires: outgoing.wires,
            public: outgoing.public,
        };

        let mut in_flight = sent.wires.clone();
        let mut observed = ObservedRound {
            round,
            direction,
            public: sent.public.clone(),
            wires: corrupted
                .keys()
                .map(|&w| (w, sent.wires[w].clone()))
                .collect(),
        };
        {
            let mut interception = Interception {
                round,
                direction,
                public: sent.public.as_ref(),
                sent: &sent.wires,
                in_flight: &mut in_flight,
                corrupted: &mut corrupted,
                budget: params.t,
                mode: adversary.mode(),
                observed: &mut observed,
            };
            adversary.intercept(&mut interception, &mut adversary_coins)?;
        }

        let delivered = RoundTraffic {
            direction,
            wires: in_flight,
            public: sent.public.clone(),
        };
        match direction {
            Direction::SenderToReceiver => receiver
                .receive(round, &delivered, &mut receiver_coins)
                .map_err(party_fault("receiver", round))?,
            Direction::ReceiverToSender => sender
                .receive(round, &delivered, &mut sender_coins)
                .map_err(party_fault("sender", round))?,
        }
        transcript.push(RoundRecord {
            round,
            direction,
            sent,
            delivered,
        });
        observed_rounds.push(observed);
    }

    transcript.set_corrupted(corrupted);
    let adversary_output = adversary.output(&mut adversary_coins);
    let view = AdversaryView {
        coins: adversary_coins.recorded().cloned().unwrap_or_default(),
        rounds: observed_rounds,
    };
    Ok(ExecutionResult {
        sender_output: sender.output(),
        receiver_output: receiver.output(),
        adversary_output,
        transcript,
        view,
    })
}

/// Wires in `corrupted` that were corrupted before `round` started or during it.
pub(crate) fn visible_at(corrupted: &BTreeMap<usize, usize>, round: usize) -> BTreeSet<usize> {
    corrupted
        .iter()
        .filter(|(_, &since)| since <= round)
        .map(|(&w, _)| w)
        .collect()
}
