use crate::bits::BitString;
use crate::channels::{
    run_execution, Adversary, Direction, ExecutionResult, Outgoing, Party, PartyError,
    RoundTraffic, SimulationFault, WireMessage,
};
use crate::params::ProtocolParams;
use crate::random::RandomStream;

use super::{
    bad_wires, receiver_output, receiver_round2, receiver_round2_with, sender_round1,
    sender_round3, Pads, ProtocolError, PublicMsg2, PublicMsg3, ReceiverState, SenderState,
};
use crate::hashing::HashKey;

pub const PI1_SCHEDULE: [Direction; 3] = [
    Direction::SenderToReceiver,
    Direction::ReceiverToSender,
    Direction::SenderToReceiver,
];

fn absent(n: usize) -> Vec<WireMessage> {
    vec![WireMessage::Absent; n]
}

#[derive(Debug, Clone)]
pub struct Pi1Sender {
    params: ProtocolParams,
    message: BitString,
    preset: Option<Vec<Pads>>,
    state: Option<SenderState>,
    msg2: Option<PublicMsg2>,
    msg3: Option<PublicMsg3>,
}

impl Pi1Sender {
    pub fn new(params: &ProtocolParams, message: BitString) -> Self {
        Self {
            params: *params,
            message,
            preset: None,
            state: None,
            msg2: None,
            msg3: None,
        }
    }

    /// A sender that uses `pads` instead of drawing them.
    pub fn with_pads(params: &ProtocolParams, message: BitString, pads: Vec<Pads>) -> Self {
        Self {
            preset: Some(pads),
            ..Self::new(params, message)
        }
    }

    pub fn state(&self) -> Option<&SenderState> {
        self.state.as_ref()
    }

    pub fn msg2(&self) -> Option<&PublicMsg2> {
        self.msg2.as_ref()
    }

    pub fn msg3(&self) -> Option<&PublicMsg3> {
        self.msg3.as_ref()
    }
}

impl Party for Pi1Sender {
    fn initiate(&mut self, round: usize, coins: &mut RandomStream) -> Result<Outgoing, PartyError> {
        match round {
            0 => {
                let (state, wires) = match self.preset.take() {
                    Some(pads) => {
                        let state = SenderState::from_pads(&self.params, &self.message, pads)?;
                        let wires = state.wire_payloads();
                        (state, wires)
                    }
                    None => sender_round1(&self.params, &self.message, coins)?,
                };
                self.state = Some(state);
                Ok(Outgoing { wires, public: None })
            }
            2 => {
                let state = self.state.as_ref().ok_or(ProtocolError::OutOfOrder {
                    role: "sender",
                    round,
                })?;
                let msg2 = self.msg2.as_ref().ok_or(ProtocolError::OutOfOrder {
                    role: "sender",
                    round,
                })?;
                let msg3 = sender_round3(state, msg2)?;
                let public = msg3.encode();
                self.msg3 = Some(msg3);
                Ok(Outgoing {
                    wires: absent(self.params.n),
                    public: Some(public),
                })
            }
            _ => Err(ProtocolError::OutOfOrder {
                role: "sender",
                round,
            }
            .into()),
        }
    }

    fn receive(&mut self, round: usize, traffic: &RoundTraffic, _: &mut RandomStream) -> Result<(), PartyError> {
        let public = match (round, &traffic.public) {
            (1, Some(p)) => p,
            _ => {
                return Err(ProtocolError::OutOfOrder {
                    role: "sender",
                    round,
                }
                .into())
            }
        };
        self.msg2 = Some(PublicMsg2::decode(&self.params, public)?);
        Ok(())
    }

    fn output(&self) -> Option<BitString> {
        Some(self.message.clone())
    }
}

#[derive(Debug, Clone)]
pub struct Pi1Receiver {
    params: ProtocolParams,
    preset: Option<Vec<HashKey>>,
    keys_requested: usize,
    state: Option<ReceiverState>,
    msg2: Option<PublicMsg2>,
    output: Option<BitString>,
}

impl Pi1Receiver {
    pub fn new(params: &ProtocolParams) -> Self {
        Self {
            params: *params,
            preset: None,
            keys_requested: 0,
            state: None,
            msg2: None,
            output: None,
        }
    }

    /// A receiver that takes its hash keys from `keys` in order. Once they run out it keeps
    /// using the last one; `keys_requested` tells how many it needed.
    pub fn with_keys(params: &ProtocolParams, keys: Vec<HashKey>) -> Self {
        assert!(!keys.is_empty(), "at least one preset key is needed");
        Self {
            preset: Some(keys),
            ..Self::new(params)
        }
    }

    pub fn keys_requested(&self) -> usize {
        self.keys_requested
    }

    pub fn state(&self) -> Option<&ReceiverState> {
        self.state.as_ref()
    }
}

impl Party for Pi1Receiver {
    fn initiate(&mut self, round: usize, _: &mut RandomStream) -> Result<Outgoing, PartyError> {
        let hash = self.state.as_ref().map(|s| *s.hash_params());
        match (round, &self.msg2, hash) {
            (1, Some(msg2), Some(hash)) => Ok(Outgoing {
                wires: absent(self.params.n),
                public: Some(msg2.encode(&hash)),
            }),
            _ => Err(ProtocolError::OutOfOrder {
                role: "receiver",
                round,
            }
            .into()),
        }
    }

    fn receive(&mut self, round: usize, traffic: &RoundTraffic, coins: &mut RandomStream) -> Result<(), PartyError> {
        match round {
            0 => {
                let (state, msg2) = match &self.preset {
                    Some(keys) => {
                        let requested = &mut self.keys_requested;
                        receiver_round2_with(&self.params, &traffic.wires, |_| {
                            *requested += 1;
                            keys[(*requested - 1).min(keys.len() - 1)].clone()
                        })?
                    }
                    None => receiver_round2(&self.params, &traffic.wires, coins)?,
                };
                self.state = Some(state);
                self.msg2 = Some(msg2);
                Ok(())
            }
            2 => {
                let (state, public) = match (&self.state, &traffic.public) {
                    (Some(s), Some(p)) => (s, p),
                    _ => {
                        return Err(ProtocolError::OutOfOrder {
                            role: "receiver",
                            round,
                        }
                        .into())
                    }
                };
                let msg3 = PublicMsg3::decode(&self.params, public)?;
                self.output = Some(receiver_output(state, &msg3)?);
                Ok(())
            }
            _ => Err(ProtocolError::OutOfOrder {
                role: "receiver",
                round,
            }
            .into()),
        }
    }

    fn output(&self) -> Option<BitString> {
        self.output.clone()
    }
}

/// A finished execution together with both parties' final state.
#[derive(Debug, Clone)]
pub struct Pi1Outcome {
    pub execution: ExecutionResult,
    pub sender: Pi1Sender,
    pub receiver: Pi1Receiver,
}

impl Pi1Outcome {
    pub fn delivered(&self) -> bool {
        self.execution.receiver_output.is_some()
            && self.execution.receiver_output == self.execution.sender_output
    }

    pub fn b(&self) -> Option<&BitString> {
        self.receiver.state().map(ReceiverState::b)
    }

    pub fn v(&self) -> Option<&BitString> {
        self.sender.msg3().map(|m| &m.v)
    }

    pub fn bad_wires(&self) -> Vec<usize> {
        match (self.sender.state(), self.receiver.state()) {
            (Some(s), Some(r)) => bad_wires(s, r),
            _ => Vec::new(),
        }
    }
}

/// One full execution of the protocol against `adversary`.
pub fn run_pi1<A: Adversary + ?Sized>(
    params: &ProtocolParams,
    message: &BitString,
    adversary: &mut A,
    stream: &RandomStream,
) -> Result<Pi1Outcome, SimulationFault> {
    let mut sender = Pi1Sender::new(params, message.clone());
    let mut receiver = Pi1Receiver::new(params);
    let execution = run_execution(
        &PI1_SCHEDULE,
        &mut sender,
        &mut receiver,
        adversary,
        params,
        stream,
    )?;
    Ok(Pi1Outcome {
        execution,
        sender,
        receiver,
    })
}
