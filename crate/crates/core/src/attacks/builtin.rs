use super::toy::{Role, Symbol, ToyBuilder, ToyProtocol, Traffic};
use super::AttackError;
use crate::bits::BitString;
use crate::channels::WireMessage;
use crate::hashing::{HashKey, HashParams};
use crate::params::ProtocolParams;
use crate::protocol::{
    receiver_output, receiver_round2_with, sender_round3, Pads, PublicMsg2, PublicMsg3, ReceiverState, SenderState,
};

pub const BUILTIN_TOYS: [&str; 8] = ["otp2", "clear2", "xor2", "repeat2", "otp3", "relay3", "public1", "pi1"];

pub fn builtin(name: &str) -> Option<Result<ToyProtocol, AttackError>> {
    Some(match name {
        "otp2" => otp2(),
        "clear2" => clear2(),
        "xor2" => xor2(),
        "repeat2" => repeat2(),
        "otp3" => otp3(),
        "relay3" => relay3(),
        "public1" => public1(),
        "pi1" => pi1(),
        _ => return None,
    })
}

fn or_zero(w: Option<Symbol>) -> Symbol {
    w.unwrap_or(0)
}

/// R sends a pad on each wire and a public nonce bit; S publishes `M ⊕ pad_1 ⊕ pad_2`.
fn otp2() -> Result<ToyProtocol, AttackError> {
    ToyBuilder::new("otp2", 2, 1, 4, 1, 32)
        .round(Role::Receiver, true, |_, c, _| Traffic {
            public: Some(c >> 4),
            wires: vec![Some(c & 3), Some(c >> 2 & 3)],
        })
        .round(Role::Sender, true, |h, _, m| {
            Traffic::public(m ^ or_zero(h[0].wires[0]) ^ or_zero(h[0].wires[1]), 2)
        })
        .decoder(|h, c| or_zero(h[0].public) ^ (c & 3) ^ (c >> 2 & 3))
        .tabulate()
}

/// Ignores the wires and publishes the message.
fn clear2() -> Result<ToyProtocol, AttackError> {
    ToyBuilder::new("clear2", 2, 1, 4, 1, 1)
        .round(Role::Receiver, true, |_, _, _| Traffic::public(0, 2))
        .round(Role::Sender, true, |_, _, m| Traffic::public(m, 2))
        .decoder(|h, _| or_zero(h[0].public))
        .tabulate()
}

/// Share `s` on wire 1 in round one, `M ⊕ s` on wire 2 in round two.
fn xor2() -> Result<ToyProtocol, AttackError> {
    ToyBuilder::new("xor2", 2, 1, 4, 4, 1)
        .round(Role::Sender, false, |_, s, _| Traffic::wires_only(vec![Some(s), None]))
        .round(Role::Sender, false, |_, s, m| Traffic::wires_only(vec![None, Some(m ^ s)]))
        .decoder(|h, _| match (h[0].wires[0], h[1].wires[1]) {
            (Some(a), Some(b)) => a ^ b,
            (a, b) => or_zero(a.or(b)),
        })
        .tabulate()
}

/// The message on every wire, twice.
fn repeat2() -> Result<ToyProtocol, AttackError> {
    let all = |_: &[Traffic], _, m| Traffic::wires_only(vec![Some(m), Some(m)]);
    ToyBuilder::new("repeat2", 2, 1, 4, 1, 1)
        .round(Role::Sender, false, all)
        .round(Role::Sender, false, all)
        .decoder(|h, _| or_zero(h.iter().flat_map(|t| t.wires.iter().flatten()).next().copied()))
        .tabulate()
}

/// R sends a pad per wire; S publishes `M ⊕ x_1 ⊕ x_2` over the pads it received, then echoes
/// them back on their wires. R strips the echoed pads where they arrive and its own elsewhere.
fn otp3() -> Result<ToyProtocol, AttackError> {
    ToyBuilder::new("otp3", 2, 1, 4, 1, 16)
        .round(Role::Receiver, false, |_, c, _| {
            Traffic::wires_only(vec![Some(c & 3), Some(c >> 2)])
        })
        .round(Role::Sender, true, |h, _, m| {
            Traffic::public(m ^ or_zero(h[0].wires[0]) ^ or_zero(h[0].wires[1]), 2)
        })
        .round(Role::Sender, false, |h, _, _| Traffic::wires_only(h[0].wires.clone()))
        .decoder(|h, c| {
            let own = [c & 3, c >> 2];
            let echo = &h[1].wires;
            or_zero(h[0].public) ^ echo[0].unwrap_or(own[0]) ^ echo[1].unwrap_or(own[1])
        })
        .tabulate()
}

/// S sends a pad per wire; R echoes what it received on the public channel; S then sends
/// `M ⊕ pad_i` on every wire whose echo matched. R unmasks the first such wire.
fn relay3() -> Result<ToyProtocol, AttackError> {
    let echo = |w: Option<Symbol>| w.unwrap_or(4);
    ToyBuilder::new("relay3", 2, 1, 4, 16, 1)
        .round(Role::Sender, false, |_, c, _| {
            Traffic::wires_only(vec![Some(c & 3), Some(c >> 2)])
        })
        .round(Role::Receiver, true, move |h, _, _| {
            Traffic::public(echo(h[0].wires[0]) * 5 + echo(h[0].wires[1]), 2)
        })
        .round(Role::Sender, false, |h, c, m| {
            let e = or_zero(h[0].public);
            let pads = [c & 3, c >> 2];
            let seen = [e / 5, e % 5];
            Traffic::wires_only((0..2).map(|i| (seen[i] == pads[i]).then_some(m ^ pads[i])).collect())
        })
        .decoder(|h, _| {
            (0..2)
                .find_map(|i| Some(h[1].wires[i]? ^ h[0].wires[i]?))
                .unwrap_or(0)
        })
        .tabulate()
}

/// One public round carrying the message.
fn public1() -> Result<ToyProtocol, AttackError> {
    ToyBuilder::new("public1", 2, 1, 4, 1, 1)
        .round(Role::Sender, true, |_, _, m| Traffic::public(m, 2))
        .decoder(|h, _| or_zero(h[0].public))
        .tabulate()
}

/// Bit string as a symbol, with a leading 1 marking the length.
fn to_symbol(bits: &BitString) -> Symbol {
    (1 << bits.len()) | bits.to_uint() as Symbol
}

fn from_symbol(s: Symbol) -> Option<BitString> {
    if s == 0 {
        return None;
    }
    let len = (Symbol::BITS - 1 - s.leading_zeros()) as usize;
    Some(BitString::from_uint((s ^ (1 << len)) as u128, len))
}

const PI1_N: usize = 2;
const PI1_M: usize = 2;
const PI1_L: usize = 1;

fn pi1_pads(params: &ProtocolParams, coin: Symbol) -> Vec<Pads> {
    let w = params.wire_payload_bits();
    (0..params.n)
        .map(|i| {
            let payload = BitString::from_uint((coin >> (w * i) & ((1 << w) - 1)) as u128, w);
            Pads::parse(params, &payload).expect("payload has the wire width")
        })
        .collect()
}

fn pi1_receiver(params: &ProtocolParams, hash: &HashParams, round1: &Traffic, coin: Symbol) -> Option<(ReceiverState, PublicMsg2)> {
    let delivered: Vec<WireMessage> = round1
        .wires
        .iter()
        .map(|w| w.and_then(from_symbol).map_or(WireMessage::Blocked, WireMessage::Delivered))
        .collect();
    let key_bits = hash.key_bits();
    let mut next = 0;
    receiver_round2_with(params, &delivered, |_| {
        let index = (coin >> (key_bits * next)) & ((1 << key_bits) - 1);
        next += 1;
        HashKey::from_index(hash, index as u128)
    })
    .ok()
}

/// The three-round protocol at `n = 2, t = 1, m = 2, l = 1` as computed round functions. The
/// sender's coin holds both wires' pads, the receiver's coin one 8-bit hash key per wire.
/// Protocol errors surface as the public symbol 0 and the decoded message 0.
fn pi1() -> Result<ToyProtocol, AttackError> {
    let params = ProtocolParams::new(PI1_N, 1, PI1_M, PI1_L, 0).map_err(|e| AttackError::InvalidToy(e.to_string()))?;
    let hash = HashParams::derive(PI1_M, PI1_L).map_err(|e| AttackError::InvalidToy(e.to_string()))?;
    let sender_coins = 1 << (params.wire_payload_bits() * PI1_N);
    let receiver_coins = 1 << (hash.key_bits() * PI1_N);
    ToyBuilder::new("pi1", PI1_N, 1, 1 << PI1_M, sender_coins, receiver_coins)
        .round(Role::Sender, false, move |_, c, _| {
            Traffic::wires_only(pi1_pads(&params, c).iter().map(|p| Some(to_symbol(&p.to_payload()))).collect())
        })
        .round(Role::Receiver, true, move |h, c, _| {
            let public = pi1_receiver(&params, &hash, &h[0], c).map_or(0, |(_, msg)| to_symbol(&msg.encode(&hash)));
            Traffic::public(public, PI1_N)
        })
        .round(Role::Sender, true, move |h, c, m| {
            let msg3 = || {
                let msg2 = PublicMsg2::decode(&params, &from_symbol(h[0].public?)?).ok()?;
                let state = SenderState::from_pads(&params, &BitString::from_uint(m as u128, PI1_M), pi1_pads(&params, c)).ok()?;
                sender_round3(&state, &msg2).ok()
            };
            Traffic::public(msg3().map_or(0, |x| to_symbol(&x.encode())), PI1_N)
        })
        .decoder(move |h, c| {
            let out = || {
                let (state, _) = pi1_receiver(&params, &hash, &h[0], c)?;
                let msg3 = PublicMsg3::decode(&params, &from_symbol(h[1].public?)?).ok()?;
                receiver_output(&state, &msg3).ok()
            };
            out().map_or(0, |b| b.to_uint() as Symbol)
        })
        .computed()
}
