//! Built-in adversaries.

use std::fmt;
use std::str::FromStr;

use super::engine::{Adversary, CorruptionMode, Interception, SimulationFault};
use super::WireMessage;
use crate::bits::BitString;
use crate::params::ProtocolParams;
use crate::random::RandomStream;

/// Which wires a static adversary takes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum WireChoice {
    /// A uniformly random `t`-subset drawn from the adversary's coins.
    #[default]
    Random,
    /// The last `t` wires.
    Last,
    Fixed(Vec<usize>),
}

impl WireChoice {
    fn pick(&self, params: &ProtocolParams, coins: &mut RandomStream) -> Vec<usize> {
        match self {
            WireChoice::Random => coins.subset(params.n, params.t),
            WireChoice::Last => (params.n - params.t..params.n).collect(),
            WireChoice::Fixed(w) => w.clone(),
        }
    }
}

/// Reads its wires, never touches them.
#[derive(Debug, Clone, Default)]
pub struct Passive {
    pub wires: WireChoice,
}

impl Adversary for Passive {
    fn initial_corruptions(&mut self, params: &ProtocolParams, coins: &mut RandomStream) -> Vec<usize> {
        self.wires.pick(params, coins)
    }

    fn intercept(&mut self, _: &mut Interception<'_>, _: &mut RandomStream) -> Result<(), SimulationFault> {
        Ok(())
    }
}

/// Blocks every corrupted wire in every round.
#[derive(Debug, Clone, Default)]
pub struct Blocking {
    pub wires: WireChoice,
}

impl Adversary for Blocking {
    fn initial_corruptions(&mut self, params: &ProtocolParams, coins: &mut RandomStream) -> Vec<usize> {
        self.wires.pick(params, coins)
    }

    fn intercept(&mut self, round: &mut Interception<'_>, _: &mut RandomStream) -> Result<(), SimulationFault> {
        for wire in round.corrupted() {
            round.block(wire)?;
        }
        Ok(())
    }
}

/// Replaces every delivered payload on its wires with fresh uniform bits of the same length.
#[derive(Debug, Clone, Default)]
pub struct RandomSubstitution {
    pub wires: WireChoice,
}

impl Adversary for RandomSubstitution {
    fn initial_corruptions(&mut self, params: &ProtocolParams, coins: &mut RandomStream) -> Vec<usize> {
        self.wires.pick(params, coins)
    }

    fn intercept(&mut self, round: &mut Interception<'_>, coins: &mut RandomStream) -> Result<(), SimulationFault> {
        for wire in round.corrupted() {
            if let WireMessage::Delivered(p) = round.observe(wire)? {
                let fresh = coins.bits(p.len());
                round.replace(wire, WireMessage::Delivered(fresh))?;
            }
        }
        Ok(())
    }
}

/// Replaces the delivered payload on the `k`-th corrupted wire (ascending) with `payloads[k]`.
#[derive(Debug, Clone)]
pub struct Replace {
    pub wires: WireChoice,
    pub payloads: Vec<BitString>,
}

impl Adversary for Replace {
    fn initial_corruptions(&mut self, params: &ProtocolParams, coins: &mut RandomStream) -> Vec<usize> {
        self.wires.pick(params, coins)
    }

    fn intercept(&mut self, round: &mut Interception<'_>, _: &mut RandomStream) -> Result<(), SimulationFault> {
        for (wire, payload) in round.corrupted().into_iter().zip(&self.payloads) {
            if let WireMessage::Delivered(_) = round.observe(wire)? {
                round.replace(wire, WireMessage::Delivered(payload.clone()))?;
            }
        }
        Ok(())
    }
}

/// XORs a fixed mask into every delivered payload of matching length. Deterministic given the
/// mask, which plays the role of the adversary's coins.
#[derive(Debug, Clone)]
pub struct MaskSubstitution {
    pub wires: WireChoice,
    pub mask: BitString,
}

impl Adversary for MaskSubstitution {
    fn initial_corruptions(&mut self, params: &ProtocolParams, coins: &mut RandomStream) -> Vec<usize> {
        self.wires.pick(params, coins)
    }

    fn intercept(&mut self, round: &mut Interception<'_>, _: &mut RandomStream) -> Result<(), SimulationFault> {
        for wire in round.corrupted() {
            if let WireMessage::Delivered(p) = round.observe(wire)? {
                if let Ok(x) = p.xor(&self.mask) {
                    round.replace(wire, WireMessage::Delivered(x))?;
                }
            }
        }
        Ok(())
    }
}

/// Flips one uniformly chosen bit of every delivered payload on its wires.
#[derive(Debug, Clone, Default)]
pub struct BitFlip {
    pub wires: WireChoice,
}

impl Adversary for BitFlip {
    fn initial_corruptions(&mut self, params: &ProtocolParams, coins: &mut RandomStream) -> Vec<usize> {
        self.wires.pick(params, coins)
    }

    fn intercept(&mut self, round: &mut Interception<'_>, coins: &mut RandomStream) -> Result<(), SimulationFault> {
        for wire in round.corrupted() {
            if let WireMessage::Delivered(p) = round.observe(wire)? {
                if p.is_empty() {
                    continue;
                }
                let mut q = p.clone();
                let i = coins.below(q.len() as u64) as usize;
                q.set(i, !q.get(i));
                round.replace(wire, WireMessage::Delivered(q))?;
            }
        }
        Ok(())
    }
}

/// Starts with no wires and corrupts `t` of them one by one while the first round is in flight,
/// substituting fresh bits on each.
#[derive(Debug, Clone, Default)]
pub struct AdaptiveSubstitution;

impl Adversary for AdaptiveSubstitution {
    fn mode(&self) -> CorruptionMode {
        CorruptionMode::Adaptive
    }

    fn initial_corruptions(&mut self, _: &ProtocolParams, _: &mut RandomStream) -> Vec<usize> {
        Vec::new()
    }

    fn intercept(&mut self, round: &mut Interception<'_>, coins: &mut RandomStream) -> Result<(), SimulationFault> {
        if round.round() != 0 {
            return Ok(());
        }
        let n = round.wire_count();
        let budget = round.budget().min(n);
        while round.corrupted().len() < budget {
            let wire = coins.below(n as u64) as usize;
            if round.is_corrupted(wire) {
                continue;
            }
            round.corrupt(wire)?;
            if let WireMessage::Delivered(p) = round.observe(wire)? {
                let fresh = coins.bits(p.len());
                round.replace(wire, WireMessage::Delivered(fresh))?;
            }
        }
        Ok(())
    }
}

/// Names of the built-in adversaries, as accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AdversaryKind {
    Passive,
    Block,
    Substitute,
    Flip,
    Adaptive,
}

impl AdversaryKind {
    pub const ALL: [AdversaryKind; 5] = [
        AdversaryKind::Passive,
        AdversaryKind::Block,
        AdversaryKind::Substitute,
        AdversaryKind::Flip,
        AdversaryKind::Adaptive,
    ];

    pub fn build(self) -> Box<dyn Adversary + Send> {
        match self {
            AdversaryKind::Passive => Box::new(Passive::default()),
            AdversaryKind::Block => Box::new(Blocking::default()),
            AdversaryKind::Substitute => Box::new(RandomSubstitution::default()),
            AdversaryKind::Flip => Box::new(BitFlip::default()),
            AdversaryKind::Adaptive => Box::new(AdaptiveSubstitution),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AdversaryKind::Passive => "passive",
            AdversaryKind::Block => "block",
            AdversaryKind::Substitute => "substitute",
            AdversaryKind::Flip => "flip",
            AdversaryKind::Adaptive => "adaptive",
        }
    }
}

impl fmt::Display for AdversaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AdversaryKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AdversaryKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown adversary {s:?}"))
    }
}
