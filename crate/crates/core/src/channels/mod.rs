//! Synchronous simulator of `n` bidirectional wires plus an authentic public channel.
//!
//! One execution runs a fixed round schedule. In every round the initiator hands the engine a
//! payload per wire and optionally a public payload; the adversary sees the public payload and
//! the payloads on its corrupted wires, may tamper with or block those wires only, and the engine
//! then delivers the merged traffic. Public payloads are always delivered verbatim.

pub mod adversaries;
mod engine;
mod transcript;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;

pub use engine::{
    run_execution, Adversary, CorruptionMode, ExecutionResult, Interception, Outgoing, Party,
    PartyError, SimulationFault,
};
pub use transcript::{AdversaryView, IntegrityViolation, ObservedRound, RoundRecord, Transcript};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "StoR")]
    SenderToReceiver,
    #[serde(rename = "RtoS")]
    ReceiverToSender,
}

/// What one wire carries in one round.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "status", content = "payload")]
pub enum WireMessage {
    /// A payload arrived. Its length is not checked here; receivers judge malformedness.
    Delivered(BitString),
    /// The adversary suppressed the payload.
    Blocked,
    /// Nothing was scheduled on this wire.
    Absent,
}

impl WireMessage {
    pub fn payload(&self) -> Option<&BitString> {
        match self {
            WireMessage::Delivered(b) => Some(b),
            _ => None,
        }
    }

    pub fn payload_bits(&self) -> usize {
        self.payload().map_or(0, BitString::len)
    }
}

/// Traffic of one round in one direction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTraffic {
    pub direction: Direction,
    pub wires: Vec<WireMessage>,
    pub public: Option<BitString>,
}

#[cfg(test)]
mod tests {
    use super::adversaries::{AdaptiveSubstitution, Blocking, Passive, RandomSubstitution, WireChoice};
    use super::*;
    use crate::params::ProtocolParams;
    use crate::random::RandomStream;

    /// Sends a fixed payload per wire each sender round and records what arrives.
    struct Echo {
        n: usize,
        got: Vec<RoundTraffic>,
    }

    impl Party for Echo {
        fn initiate(&mut self, round: usize, coins: &mut RandomStream) -> Result<Outgoing, PartyError> {
            Ok(Outgoing {
                wires: (0..self.n).map(|_| WireMessage::Delivered(coins.bits(8))).collect(),
                public: Some(BitString::from_uint(round as u128, 4)),
            })
        }

        fn receive(&mut self, _: usize, traffic: &RoundTraffic, _: &mut RandomStream) -> Result<(), PartyError> {
            self.got.push(traffic.clone());
            Ok(())
        }

        fn output(&self) -> Option<BitString> {
            None
        }
    }

    fn echo(n: usize) -> Echo {
        Echo { n, got: Vec::new() }
    }

    const SCHEDULE: [Direction; 3] = [
        Direction::SenderToReceiver,
        Direction::ReceiverToSender,
        Direction::SenderToReceiver,
    ];

    fn run<A: Adversary>(adv: &mut A, n: usize, t: usize, seed: u64) -> Result<(ExecutionResult, Echo, Echo), SimulationFault> {
        let params = ProtocolParams::new(n, t, 16, 4, seed).unwrap();
        let (mut s, mut r) = (echo(n), echo(n));
        let res = run_execution(&SCHEDULE, &mut s, &mut r, adv, &params, &RandomStream::new(seed))?;
        Ok((res, s, r))
    }

    struct Greedy(Vec<usize>);

    impl Adversary for Greedy {
        fn initial_corruptions(&mut self, _: &ProtocolParams, _: &mut RandomStream) -> Vec<usize> {
            self.0.clone()
        }
        fn intercept(&mut self, _: &mut Interception<'_>, _: &mut RandomStream) -> Result<(), SimulationFault> {
            Ok(())
        }
    }

    struct TouchHonest;

    impl Adversary for TouchHonest {
        fn initial_corruptions(&mut self, _: &ProtocolParams, _: &mut RandomStream) -> Vec<usize> {
            vec![0]
        }
        fn intercept(&mut self, round: &mut Interception<'_>, _: &mut RandomStream) -> Result<(), SimulationFault> {
            round.block(1)
        }
    }

    struct StaticCorrupter;

    impl Adversary for StaticCorrupter {
        fn initial_corruptions(&mut self, _: &ProtocolParams, _: &mut RandomStream) -> Vec<usize> {
            vec![0]
        }
        fn intercept(&mut self, round: &mut Interception<'_>, _: &mut RandomStream) -> Result<(), SimulationFault> {
            round.corrupt(0)?;
            round.corrupt(1)
        }
    }

    struct Overspender;

    impl Adversary for Overspender {
        fn mode(&self) -> CorruptionMode {
            CorruptionMode::Adaptive
        }
        fn initial_corruptions(&mut self, _: &ProtocolParams, _: &mut RandomStream) -> Vec<usize> {
            vec![]
        }
        fn intercept(&mut self, round: &mut Interception<'_>, _: &mut RandomStream) -> Result<(), SimulationFault> {
            round.corrupt(0)?;
            round.corrupt(0)?;
            assert_eq!(round.corrupted(), vec![0]);
            round.corrupt(1)
        }
    }

    #[test]
    fn passive_run_is_untouched() {
        let (res, s, r) = run(&mut Passive::default(), 4, 2, 7).unwrap();
        res.transcript.check_integrity().unwrap();
        for rec in &res.transcript.rounds {
            assert_eq!(rec.sent, rec.delivered);
        }
        assert_eq!(r.got.len(), 2);
        assert_eq!(s.got.len(), 1);
        assert_eq!(res.transcript.corrupted.len(), 2);
        assert_eq!(res.transcript.wire_bits_sent, 3 * 4 * 8);
        assert_eq!(res.transcript.public_bits_sent, 12);
    }

    #[test]
    fn view_matches_projection() {
        let (res, _, _) = run(&mut RandomSubstitution::default(), 5, 3, 11).unwrap();
        assert_eq!(res.view.rounds, res.transcript.adversary_projection());
        for obs in &res.view.rounds {
            assert_eq!(obs.wires.len(), 3);
        }
        assert!(!res.view.coins.is_empty());
    }

    #[test]
    fn blocking_blocks_only_corrupted() {
        let mut adv = Blocking {
            wires: WireChoice::Fixed(vec![1, 3]),
        };
        let (res, _, _) = run(&mut adv, 4, 2, 3).unwrap();
        res.transcript.check_integrity().unwrap();
        for rec in &res.transcript.rounds {
            for (i, w) in rec.delivered.wires.iter().enumerate() {
                assert_eq!(*w == WireMessage::Blocked, i == 1 || i == 3);
            }
        }
    }

    #[test]
    fn contract_violations_fault() {
        assert!(matches!(
            run(&mut Greedy(vec![0, 1, 2]), 4, 2, 0),
            Err(SimulationFault::BudgetExceeded { budget: 2, .. })
        ));
        assert!(matches!(
            run(&mut Greedy(vec![9]), 4, 2, 0),
            Err(SimulationFault::NoSuchWire { wire: 9, n: 4 })
        ));
        assert!(matches!(
            run(&mut TouchHonest, 4, 2, 0),
            Err(SimulationFault::HonestWire { wire: 1 })
        ));
        assert!(matches!(
            run(&mut StaticCorrupter, 4, 2, 0),
            Err(SimulationFault::StaticCorruption { wire: 1 })
        ));
        assert!(matches!(
            run(&mut Overspender, 4, 1, 0),
            Err(SimulationFault::BudgetExceeded { wire: 1, budget: 1 })
        ));
    }

    #[test]
    fn adaptive_corruption_is_recorded() {
        let (res, _, _) = run(&mut AdaptiveSubstitution, 5, 3, 4).unwrap();
        res.transcript.check_integrity().unwrap();
        assert_eq!(res.transcript.corrupted.len(), 3);
        assert!(res.transcript.corrupted.values().all(|&r| r == 0));
        assert_eq!(res.view.rounds, res.transcript.adversary_projection());
    }

    #[test]
    fn tampering_detected_by_integrity_check() {
        let (mut res, _, _) = run(&mut Passive::default(), 3, 1, 5).unwrap();
        let honest = (0..3).find(|w| !res.transcript.corrupted.contains_key(w)).unwrap();
        res.transcript.rounds[0].delivered.wires[honest] = WireMessage::Blocked;
        assert_eq!(
            res.transcript.check_integrity(),
            Err(IntegrityViolation::HonestWireAltered { round: 0, wire: honest })
        );
        res.transcript.rounds[0].delivered.wires[honest] = res.transcript.rounds[0].sent.wires[honest].clone();
        res.transcript.rounds[1].delivered.public = None;
        assert_eq!(
            res.transcript.check_integrity(),
            Err(IntegrityViolation::PublicAltered { round: 1 })
        );
    }

    #[test]
    fn deterministic_and_json_lines() {
        let a = run(&mut RandomSubstitution::default(), 4, 3, 99).unwrap().0;
        let b = run(&mut RandomSubstitution::default(), 4, 3, 99).unwrap().0;
        assert_eq!(a.transcript, b.transcript);
        let text = a.transcript.to_json_lines();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        let rec: RoundRecord = serde_json::from_str(lines[0]).unwrap();
        assert_eq!(rec, a.transcript.rounds[0]);
        let trailer: serde_json::Value = serde_json::from_str(lines[3]).unwrap();
        assert_eq!(trailer["trailer"], true);
        assert_eq!(trailer["budget"], 3);
        assert!(lines[0].contains("\"StoR\""));
    }
}
