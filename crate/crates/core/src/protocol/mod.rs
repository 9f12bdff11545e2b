//! The three-round protocol: pads over the wires, then two rounds on the public channel.
//!
//! 1. The sender puts `r_i ∥ R_i` on every wire `i`, with `r_i` of `l` bits and `R_i` of `m` bits.
//! 2. The receiver marks every wire whose payload did not arrive intact-looking in `B`, picks a
//!    hash key `h_i` for each remaining wire and publishes `B` together with `(h_i, r_i' ⊕ h_i(R_i'))`.
//! 3. The sender checks each tag against its own pads, publishes the verified set `V` and
//!    `C = M ⊕ (⊕_{v_i = 1} R_i)`. The receiver strips its copies of the same pads off `C`.

mod parties;

use thiserror::Error;

use crate::bits::{BitString, BitsError};
use crate::channels::WireMessage;
use crate::hashing::{evaluate_blocks, input_blocks, sample_key, HashError, HashKey, HashParams};
use crate::params::{ParamsError, ProtocolParams};
use crate::random::RandomStream;

pub use parties::{run_pi1, Pi1Outcome, Pi1Receiver, Pi1Sender, PI1_SCHEDULE};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Hash(#[from] HashError),
    #[error(transparent)]
    Bits(#[from] BitsError),
    #[error("message must be {expected} bits, got {got}")]
    MessageLength { expected: usize, got: usize },
    #[error("expected {expected} wire slots, got {got}")]
    WireCount { expected: usize, got: usize },
    #[error("{which} must be {expected} bits, got {got}")]
    Width {
        which: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("second-round message has {got} bits, expected {expected} for B = {b}")]
    Msg2Length {
        b: BitString,
        expected: usize,
        got: usize,
    },
    #[error("third-round message has {got} bits, expected {expected}")]
    Msg3Length { expected: usize, got: usize },
    #[error("{entries} entries for {surviving} surviving wires")]
    EntryCount { entries: usize, surviving: usize },
    #[error("no wire verified")]
    NoVerifiedWire,
    #[error("wire {wire} verified although the receiver dropped it")]
    VerifiedDroppedWire { wire: usize },
    #[error("round {round} is out of order for the {role}")]
    OutOfOrder { role: &'static str, round: usize },
}

fn check_width(which: &'static str, bits: &BitString, expected: usize) -> Result<(), ProtocolError> {
    if bits.len() != expected {
        return Err(ProtocolError::Width {
            which,
            expected,
            got: bits.len(),
        });
    }
    Ok(())
}

/// One wire's pads: `r` of `l` bits and `big_r` of `m` bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pads {
    pub r: BitString,
    pub big_r: BitString,
}

impl Pads {
    pub fn to_payload(&self) -> BitString {
        self.r.concat(&self.big_r)
    }

    /// Splits a payload of exactly `l + m` bits; anything else is malformed.
    pub fn parse(params: &ProtocolParams, payload: &BitString) -> Option<Pads> {
        (payload.len() == params.wire_payload_bits()).then(|| Pads {
            r: payload.slice(0, params.l),
            big_r: payload.slice(params.l, params.m),
        })
    }
}

/// `r ⊕ h(R)`.
fn tag(hash: &HashParams, key: &HashKey, pads: &Pads) -> Result<BitString, ProtocolError> {
    let digest = evaluate_blocks(key, &input_blocks(hash, &pads.big_r)?, hash);
    Ok(pads.r.xor(&BitString::from_uint(digest, hash.output_bits()))?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SenderState {
    params: ProtocolParams,
    hash: HashParams,
    message: BitString,
    pads: Vec<Pads>,
}

impl SenderState {
    /// A sender with the given pads instead of sampled ones.
    pub fn from_pads(
        params: &ProtocolParams,
        message: &BitString,
        pads: Vec<Pads>,
    ) -> Result<Self, ProtocolError> {
        params.validate()?;
        check_width("message", message, params.m)?;
        if pads.len() != params.n {
            return Err(ProtocolError::WireCount {
                expected: params.n,
                got: pads.len(),
            });
        }
        for p in &pads {
            check_width("r", &p.r, params.l)?;
            check_width("R", &p.big_r, params.m)?;
        }
        Ok(Self {
            params: *params,
            hash: HashParams::derive(params.m, params.l)?,
            message: message.clone(),
            pads,
        })
    }

    pub fn message(&self) -> &BitString {
        &self.message
    }

    pub fn pads(&self) -> &[Pads] {
        &self.pads
    }

    /// Round-one traffic: `r_i ∥ R_i` on wire `i`.
    pub fn wire_payloads(&self) -> Vec<WireMessage> {
        self.pads
            .iter()
            .map(|p| WireMessage::Delivered(p.to_payload()))
            .collect()
    }
}

/// Samples fresh pads for every wire, `r_i` then `R_i`, wire by wire.
pub fn sender_round1(
    params: &ProtocolParams,
    message: &BitString,
    stream: &mut RandomStream,
) -> Result<(SenderState, Vec<WireMessage>), ProtocolError> {
    params.validate()?;
    if message.len() != params.m {
        return Err(ProtocolError::MessageLength {
            expected: params.m,
            got: message.len(),
        });
    }
    let pads = (0..params.n)
        .map(|_| Pads {
            r: stream.bits(params.l),
            big_r: stream.bits(params.m),
        })
        .collect();
    let state = SenderState::from_pads(params, message, pads)?;
    let wires = state.wire_payloads();
    Ok((state, wires))
}

/// The receiver's second-round broadcast.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicMsg2 {
    /// `b_i = 1` marks a dropped wire.
    pub b: BitString,
    /// `(h_i, T_i')` for each `b_i = 0`, ascending.
    pub entries: Vec<(HashKey, BitString)>,
}

impl PublicMsg2 {
    pub fn surviving(&self) -> impl Iterator<Item = usize> + '_ {
        self.b.iter().enumerate().filter(|(_, b)| !b).map(|(i, _)| i)
    }

    /// `B`, then each surviving entry as key bits followed by tag bits. Dropped wires take no
    /// space at all.
    pub fn encode(&self, hash: &HashParams) -> BitString {
        let mut out = self.b.clone();
        for (key, t) in &self.entries {
            out.append(&key.to_bits(hash));
            out.append(t);
        }
        out
    }

    pub fn decode(params: &ProtocolParams, bits: &BitString) -> Result<Self, ProtocolError> {
        let hash = HashParams::derive(params.m, params.l)?;
        if bits.len() < params.n {
            return Err(ProtocolError::Msg2Length {
                b: bits.clone(),
                expected: params.n,
                got: bits.len(),
            });
        }
        let b = bits.slice(0, params.n);
        let surviving = params.n - b.count_ones();
        let entry_bits = hash.key_bits() + params.l;
        let expected = params.n + surviving * entry_bits;
        if bits.len() != expected {
            return Err(ProtocolError::Msg2Length {
                b,
                expected,
                got: bits.len(),
            });
        }
        let entries = (0..surviving)
            .map(|k| {
                let start = params.n + k * entry_bits;
                let key = HashKey::from_bits(&hash, &bits.slice(start, hash.key_bits()))?;
                Ok((key, bits.slice(start + hash.key_bits(), params.l)))
            })
            .collect::<Result<_, HashError>>()?;
        Ok(Self { b, entries })
    }
}

/// The sender's third-round broadcast.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PublicMsg3 {
    pub v: BitString,
    pub c: BitString,
}

impl PublicMsg3 {
    pub fn encode(&self) -> BitString {
        self.v.concat(&self.c)
    }

    pub fn decode(params: &ProtocolParams, bits: &BitString) -> Result<Self, ProtocolError> {
        let expected = params.n + params.m;
        if bits.len() != expected {
            return Err(ProtocolError::Msg3Length {
                expected,
                got: bits.len(),
            });
        }
        Ok(Self {
            v: bits.slice(0, params.n),
            c: bits.slice(params.n, params.m),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceiverState {
    params: ProtocolParams,
    hash: HashParams,
    received: Vec<Option<Pads>>,
    b: BitString,
    keys: Vec<Option<HashKey>>,
    tags: Vec<Option<BitString>>,
}

impl ReceiverState {
    pub fn received(&self) -> &[Option<Pads>] {
        &self.received
    }

    pub fn b(&self) -> &BitString {
        &self.b
    }

    pub fn keys(&self) -> &[Option<HashKey>] {
        &self.keys
    }

    pub fn tags(&self) -> &[Option<BitString>] {
        &self.tags
    }

    pub fn hash_params(&self) -> &HashParams {
        &self.hash
    }
}

/// Round two with keys drawn from `stream`, one per surviving wire in ascending order.
pub fn receiver_round2(
    params: &ProtocolParams,
    delivered: &[WireMessage],
    stream: &mut RandomStream,
) -> Result<(ReceiverState, PublicMsg2), ProtocolError> {
    let hash = HashParams::derive(params.m, params.l)?;
    receiver_round2_with(params, delivered, |_| sample_key(&hash, stream))
}

/// Round two with keys supplied by `key_for(wire)`, called only for surviving wires.
pub fn receiver_round2_with<F>(
    params: &ProtocolParams,
    delivered: &[WireMessage],
    mut key_for: F,
) -> Result<(ReceiverState, PublicMsg2), ProtocolError>
where
    F: FnMut(usize) -> HashKey,
{
    params.validate()?;
    if delivered.len() != params.n {
        return Err(ProtocolError::WireCount {
            expected: params.n,
            got: delivered.len(),
        });
    }
    let hash = HashParams::derive(params.m, params.l)?;
    let received: Vec<Option<Pads>> = delivered
        .iter()
        .map(|w| w.payload().and_then(|p| Pads::parse(params, p)))
        .collect();
    let b = BitString::from_bits(received.iter().map(Option::is_none));
    let mut keys = vec![None; params.n];
    let mut tags = vec![None; params.n];
    let mut entries = Vec::with_capacity(params.n);
    for (i, pads) in received.iter().enumerate() {
        if let Some(pads) = pads {
            let key = key_for(i);
            if key.levels().len() != hash.depth() {
                return Err(HashError::Length {
                    expected: hash.depth(),
                    got: key.levels().len(),
                }
                .into());
            }
            let t = tag(&hash, &key, pads)?;
            entries.push((key.clone(), t.clone()));
            keys[i] = Some(key);
            tags[i] = Some(t);
        }
    }
    let msg = PublicMsg2 {
        b: b.clone(),
        entries,
    };
    Ok((
        ReceiverState {
            params: *params,
            hash,
            received,
            b,
            keys,
            tags,
        },
        msg,
    ))
}

/// Checks every surviving tag against the sender's own pads and blinds the message with the
/// pads that verified.
pub fn sender_round3(state: &SenderState, msg2: &PublicMsg2) -> Result<PublicMsg3, ProtocolError> {
    let params = &state.params;
    check_width("B", &msg2.b, params.n)?;
    let surviving: Vec<usize> = msg2.surviving().collect();
    if surviving.len() != msg2.entries.len() {
        return Err(ProtocolError::EntryCount {
            entries: msg2.entries.len(),
            surviving: surviving.len(),
        });
    }
    let mut v = BitString::zeros(params.n);
    let mut c = state.message.clone();
    for (&i, (key, t_prime)) in surviving.iter().zip(&msg2.entries) {
        check_width("tag", t_prime, params.l)?;
        if key.levels().len() != state.hash.depth() {
            return Err(HashError::Length {
                expected: state.hash.depth(),
                got: key.levels().len(),
            }
            .into());
        }
        if tag(&state.hash, key, &state.pads[i])? == *t_prime {
            v.set(i, true);
            c.xor_assign(&state.pads[i].big_r)?;
        }
    }
    if v.is_zero() {
        return Err(ProtocolError::NoVerifiedWire);
    }
    Ok(PublicMsg3 { v, c })
}

/// `C ⊕ (⊕_{v_i = 1} R_i')`.
pub fn receiver_output(state: &ReceiverState, msg3: &PublicMsg3) -> Result<BitString, ProtocolError> {
    let params = &state.params;
    check_width("V", &msg3.v, params.n)?;
    check_width("C", &msg3.c, params.m)?;
    let mut out = msg3.c.clone();
    for (i, verified) in msg3.v.iter().enumerate() {
        if !verified {
            continue;
        }
        match &state.received[i] {
            Some(p) => out.xor_assign(&p.big_r)?,
            None => return Err(ProtocolError::VerifiedDroppedWire { wire: i }),
        }
    }
    Ok(out)
}

/// Wires whose pads were altered in transit yet still produced a matching tag.
pub fn bad_wires(sender: &SenderState, receiver: &ReceiverState) -> Vec<usize> {
    (0..sender.params.n)
        .filter(|&i| match (&receiver.received[i], &receiver.keys[i], &receiver.tags[i]) {
            (Some(got), Some(key), Some(t)) => {
                *got != sender.pads[i]
                    && tag(&sender.hash, key, &sender.pads[i]).ok().as_ref() == Some(t)
            }
            _ => false,
        })
        .collect()
}

/// Bits on the public channel for a given `B`: `B`, the surviving entries, `V` and `C`.
pub fn public_bits(params: &ProtocolParams, hash: &HashParams, dropped: usize) -> u64 {
    let per_entry = (hash.key_bits() + params.l) as u64;
    2 * params.n as u64 + (params.n - dropped) as u64 * per_entry + params.m as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(n: usize, t: usize, m: usize, l: usize) -> ProtocolParams {
        ProtocolParams::new(n, t, m, l, 0).unwrap()
    }

    fn setup(p: &ProtocolParams, seed: u64) -> (SenderState, Vec<WireMessage>, BitString, RandomStream) {
        let mut s = RandomStream::new(seed);
        let msg = s.bits(p.m);
        let (state, wires) = sender_round1(p, &msg, &mut s).unwrap();
        (state, wires, msg, s)
    }

    #[test]
    fn round1_layout() {
        let p = params(4, 3, 64, 8);
        let (state, wires, _, _) = setup(&p, 1);
        assert_eq!(wires.len(), 4);
        for (w, pads) in wires.iter().zip(state.pads()) {
            let payload = w.payload().unwrap();
            assert_eq!(payload.len(), 72);
            assert_eq!(payload.slice(0, 8), pads.r);
            assert_eq!(payload.slice(8, 64), pads.big_r);
        }
        let (again, _, _, _) = setup(&p, 1);
        assert_eq!(again, state);
    }

    #[test]
    fn wrong_message_length_rejected() {
        let p = params(3, 2, 16, 4);
        let mut s = RandomStream::new(0);
        let err = sender_round1(&p, &BitString::zeros(15), &mut s).unwrap_err();
        assert!(matches!(err, ProtocolError::MessageLength { expected: 16, got: 15 }));
    }

    #[test]
    fn honest_run_verifies_everything() {
        let p = params(5, 2, 32, 6);
        let (state, wires, msg, mut s) = setup(&p, 2);
        let (rstate, msg2) = receiver_round2(&p, &wires, &mut s).unwrap();
        assert!(msg2.b.is_zero());
        assert_eq!(msg2.entries.len(), 5);
        let msg3 = sender_round3(&state, &msg2).unwrap();
        assert_eq!(msg3.v.count_ones(), 5);
        let mut blind = msg.clone();
        for pads in state.pads() {
            blind.xor_assign(&pads.big_r).unwrap();
        }
        assert_eq!(msg3.c, blind);
        assert_eq!(receiver_output(&rstate, &msg3).unwrap(), msg);
    }

    #[test]
    fn blocked_and_malformed_slots_are_dropped() {
        let p = params(5, 3, 32, 6);
        let (state, mut wires, msg, mut s) = setup(&p, 3);
        wires[0] = WireMessage::Blocked;
        wires[2] = WireMessage::Absent;
        let short = wires[4].payload().unwrap().slice(0, p.l + p.m - 1);
        wires[4] = WireMessage::Delivered(short);
        let (rstate, msg2) = receiver_round2(&p, &wires, &mut s).unwrap();
        assert_eq!(msg2.b.to_string(), "10101");
        assert_eq!(msg2.entries.len(), 2);
        assert!(rstate.keys()[0].is_none() && rstate.tags()[4].is_none());
        let msg3 = sender_round3(&state, &msg2).unwrap();
        assert_eq!(msg3.v.to_string(), "01010");
        let mut blind = msg.clone();
        blind.xor_assign(&state.pads()[1].big_r).unwrap();
        blind.xor_assign(&state.pads()[3].big_r).unwrap();
        assert_eq!(msg3.c, blind);
        assert_eq!(receiver_output(&rstate, &msg3).unwrap(), msg);
    }

    #[test]
    fn substituted_wire_caught_or_bad() {
        let p = params(3, 2, 16, 4);
        let mut caught = 0;
        for seed in 0..200 {
            let (state, mut wires, msg, mut s) = setup(&p, seed);
            wires[1] = WireMessage::Delivered(s.bits(20));
            let (rstate, msg2) = receiver_round2(&p, &wires, &mut s).unwrap();
            let msg3 = sender_round3(&state, &msg2).unwrap();
            let out = receiver_output(&rstate, &msg3).unwrap();
            let bad = bad_wires(&state, &rstate);
            if msg3.v.get(1) {
                assert_eq!(bad, vec![1]);
                let mut expected = msg.clone();
                expected.xor_assign(&state.pads()[1].big_r).unwrap();
                expected
                    .xor_assign(&rstate.received()[1].as_ref().unwrap().big_r)
                    .unwrap();
                assert_eq!(out, expected);
            } else {
                caught += 1;
                assert!(bad.is_empty());
                assert_eq!(out, msg);
            }
            assert!(msg3.v.get(0) && msg3.v.get(2));
        }
        assert!(caught > 150, "caught {caught}");
    }

    #[test]
    fn verified_dropped_wire_is_an_error() {
        let p = params(3, 1, 16, 4);
        let (_, mut wires, _, mut s) = setup(&p, 4);
        wires[0] = WireMessage::Blocked;
        let (rstate, _) = receiver_round2(&p, &wires, &mut s).unwrap();
        let msg3 = PublicMsg3 {
            v: "0b111".parse().unwrap(),
            c: BitString::zeros(16),
        };
        assert!(matches!(
            receiver_output(&rstate, &msg3),
            Err(ProtocolError::VerifiedDroppedWire { wire: 0 })
        ));
    }

    #[test]
    fn malformed_msg2_rejected() {
        let p = params(3, 1, 16, 4);
        let (state, wires, _, mut s) = setup(&p, 5);
        let (_, mut msg2) = receiver_round2(&p, &wires, &mut s).unwrap();
        msg2.entries.pop();
        assert!(matches!(
            sender_round3(&state, &msg2),
            Err(ProtocolError::EntryCount { entries: 2, surviving: 3 })
        ));
        let hash = HashParams::derive(16, 4).unwrap();
        let mut bits = msg2.encode(&hash);
        bits.push(false);
        assert!(PublicMsg2::decode(&p, &bits).is_err());
    }

    #[test]
    fn encodings_round_trip() {
        let p = params(4, 2, 64, 8);
        let hash = HashParams::derive(64, 8).unwrap();
        let (state, mut wires, _, mut s) = setup(&p, 6);
        wires[3] = WireMessage::Blocked;
        let (_, msg2) = receiver_round2(&p, &wires, &mut s).unwrap();
        let bits = msg2.encode(&hash);
        assert_eq!(bits.len(), 4 + 3 * (hash.key_bits() + 8));
        assert_eq!(PublicMsg2::decode(&p, &bits).unwrap(), msg2);
        let msg3 = sender_round3(&state, &msg2).unwrap();
        let bits3 = msg3.encode();
        assert_eq!(bits3.len(), 68);
        assert_eq!(PublicMsg3::decode(&p, &bits3).unwrap(), msg3);
        assert_eq!(
            public_bits(&p, &hash, 1),
            (bits.len() + bits3.len()) as u64
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn untampered_always_delivers(seed in any::<u64>(), n in 2usize..6, m in 2usize..80) {
            let l = 1 + (seed as usize % (m - 1).min(8));
            let p = params(n, n - 1, m, l);
            let (state, wires, msg, mut s) = setup(&p, seed);
            let (rstate, msg2) = receiver_round2(&p, &wires, &mut s).unwrap();
            let msg3 = sender_round3(&state, &msg2).unwrap();
            prop_assert_eq!(msg3.v.count_ones(), n);
            prop_assert_eq!(receiver_output(&rstate, &msg3).unwrap(), msg);
        }

        #[test]
        fn honest_wires_always_verify(seed in any::<u64>(), mask in any::<u8>()) {
            let p = params(4, 3, 24, 3);
            let (state, mut wires, _, mut s) = setup(&p, seed);
            let corrupted: Vec<usize> = (0..3).filter(|i| mask >> i & 1 == 1).collect();
            for &i in &corrupted {
                wires[i] = match mask >> (4 + i) & 1 {
                    0 => WireMessage::Blocked,
                    _ => WireMessage::Delivered(s.bits(27)),
                };
            }
            let (rstate, msg2) = receiver_round2(&p, &wires, &mut s).unwrap();
            let msg3 = sender_round3(&state, &msg2).unwrap();
            prop_assert!(msg3.v.count_ones() >= 4 - corrupted.len());
            for i in (0..4).filter(|i| !corrupted.contains(i)) {
                prop_assert!(msg3.v.get(i));
            }
            let out = receiver_output(&rstate, &msg3).unwrap();
            if out != *state.message() {
                prop_assert!(!bad_wires(&state, &rstate).is_empty());
            }
        }
    }
}
