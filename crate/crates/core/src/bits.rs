//! Arbitrary-length bit strings.
//!
//! Bits are stored MSB-first inside bytes, so the in-memory buffer is already the payload of the
//! wire format: a 32-bit big-endian bit count followed by `ceil(len / 8)` bytes whose unused
//! low-order bits are zero.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;
use thiserror::Error;

/// Strings up to this many bytes live inline without touching the heap.
const INLINE_BYTES: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BitsError {
    #[error("bit length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("truncated bit string: need {needed} bytes, got {got}")]
    Truncated { needed: usize, got: usize },
    #[error("{0} trailing bytes after bit string payload")]
    TrailingBytes(usize),
    #[error("nonzero padding bits in final byte")]
    NonZeroPadding,
    #[error("bit string of {0} bits does not fit the 32-bit length header")]
    TooLong(usize),
    #[error("invalid hex: {0}")]
    Hex(String),
    #[error("invalid binary digit {0:?}")]
    Digit(char),
    #[error("width {0} exceeds 128 bits")]
    WidthTooLarge(usize),
}

/// An ordered sequence of bits. Zero length is valid.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    len: usize,
    bytes: SmallVec<[u8; INLINE_BYTES]>,
}

#[inline]
fn byte_len(bits: usize) -> usize {
    bits.div_ceil(8)
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            bytes: SmallVec::from_elem(0, byte_len(len)),
        }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut out = Self::new();
        for b in bits {
            out.push(b);
        }
        out
    }

    /// Builds a string from MSB-first bytes, keeping the first `len` bits. Bits past `len` are
    /// cleared.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Self {
        assert!(bytes.len() * 8 >= len, "not enough bytes for {len} bits");
        let mut out = Self {
            len,
            bytes: SmallVec::from_slice(&bytes[..byte_len(len)]),
        };
        out.clear_padding();
        out
    }

    /// The low `width` bits of `value`, most significant first.
    pub fn from_uint(value: u128, width: usize) -> Self {
        assert!(width <= 128, "width {width} exceeds 128 bits");
        let mut out = Self::zeros(width);
        out.write_uint(0, width, value);
        out
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Payload bytes, MSB-first, trailing pad bits zero.
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.bytes[i / 8] >> (7 - i % 8)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u8 << (7 - i % 8);
        if bit {
            self.bytes[i / 8] |= mask;
        } else {
            self.bytes[i / 8] &= !mask;
        }
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, bit);
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.bytes.iter().all(|&b| b == 0)
    }

    /// Reads `width` bits starting at `start` as a big-endian integer. Positions at or past the
    /// end of the string read as zero.
    pub fn uint_at(&self, start: usize, width: usize) -> u128 {
        assert!(width <= 128, "width {width} exceeds 128 bits");
        let mut acc = 0u128;
        let end = (start + width).min(self.len);
        let mut i = start;
        // byte-aligned fast path
        while i < end {
            if i.is_multiple_of(8) && i + 8 <= end {
                acc = (acc << 8) | u128::from(self.bytes[i / 8]);
                i += 8;
            } else {
                acc = (acc << 1) | u128::from(self.get(i));
                i += 1;
            }
        }
        let read = end.saturating_sub(start);
        if read < width {
            acc <<= width - read;
        }
        acc
    }

    /// The whole string as an integer. Requires `len <= 128`.
    pub fn to_uint(&self) -> u128 {
        assert!(self.len <= 128, "{} bits do not fit u128", self.len);
        self.uint_at(0, self.len)
    }

    fn write_uint(&mut self, start: usize, width: usize, value: u128) {
        for k in 0..width {
            let bit = (value >> (width - 1 - k)) & 1 == 1;
            self.set(start + k, bit);
        }
    }

    pub fn slice(&self, start: usize, len: usize) -> BitString {
        assert!(start + len <= self.len, "slice {start}+{len} past length {}", self.len);
        let (first, shift) = (start / 8, start % 8);
        if shift == 0 {
            return Self::from_bytes(&self.bytes[first..], len);
        }
        let src = &self.bytes[first..];
        let mut out = Self {
            len,
            bytes: (0..byte_len(len))
                .map(|j| src[j] << shift | src.get(j + 1).map_or(0, |b| b >> (8 - shift)))
                .collect(),
        };
        out.clear_padding();
        out
    }

    pub fn append(&mut self, other: &BitString) {
        if self.len.is_multiple_of(8) {
            self.bytes.extend_from_slice(&other.bytes);
            self.len += other.len;
            return;
        }
        let shift = self.len % 8;
        for &b in &other.bytes {
            *self.bytes.last_mut().expect("len > 0") |= b >> shift;
            self.bytes.push(b << (8 - shift));
        }
        self.len += other.len;
        self.bytes.truncate(byte_len(self.len));
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        out.append(other);
        out
    }

    /// Bitwise exclusive-or of two strings of equal length.
    pub fn xor(&self, other: &BitString) -> Result<BitString, BitsError> {
        let mut out = self.clone();
        out.xor_assign(other)?;
        Ok(out)
    }

    pub fn xor_assign(&mut self, other: &BitString) -> Result<(), BitsError> {
        if self.len != other.len {
            return Err(BitsError::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        for (a, b) in self.bytes.iter_mut().zip(other.bytes.iter()) {
            *a ^= *b;
        }
        Ok(())
    }

    fn clear_padding(&mut self) {
        let rem = self.len % 8;
        if rem != 0 {
            if let Some(last) = self.bytes.last_mut() {
                *last &= 0xffu8 << (8 - rem);
            }
        }
    }

    /// Wire format: 32-bit big-endian bit count, then the MSB-first payload.
    pub fn serialize(&self) -> Vec<u8> {
        let header = u32::try_from(self.len).expect("bit string too long for the wire format");
        let mut out = Vec::with_capacity(4 + self.bytes.len());
        out.extend_from_slice(&header.to_be_bytes());
        out.extend_from_slice(&self.bytes);
        out
    }

    pub fn deserialize(bytes: &[u8]) -> Result<BitString, BitsError> {
        let (bits, used) = Self::deserialize_prefix(bytes)?;
        if used != bytes.len() {
            return Err(BitsError::TrailingBytes(bytes.len() - used));
        }
        Ok(bits)
    }

    /// Decodes one bit string from the front of `bytes`, returning it and the bytes consumed.
    pub fn deserialize_prefix(bytes: &[u8]) -> Result<(BitString, usize), BitsError> {
        if bytes.len() < 4 {
            return Err(BitsError::Truncated {
                needed: 4,
                got: bytes.len(),
            });
        }
        let len = u32::from_be_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]) as usize;
        let needed = 4 + byte_len(len);
        if bytes.len() < needed {
            return Err(BitsError::Truncated {
                needed,
                got: bytes.len(),
            });
        }
        let payload = &bytes[4..needed];
        let rem = len % 8;
        if rem != 0 && payload[payload.len() - 1] & (0xffu8 >> rem) != 0 {
            return Err(BitsError::NonZeroPadding);
        }
        Ok((Self::from_bytes(payload, len), needed))
    }

    /// Hex rendering of the wire format.
    pub fn to_hex(&self) -> String {
        hex::encode(self.serialize())
    }

    pub fn from_hex(s: &str) -> Result<BitString, BitsError> {
        let bytes = hex::decode(s).map_err(|e| BitsError::Hex(e.to_string()))?;
        Self::deserialize(&bytes)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 64 {
            write!(f, "BitString({}:{})", self.len, self)
        } else {
            write!(f, "BitString({}:{}..)", self.len, self.slice(0, 64))
        }
    }
}

/// Parses a string of `0`/`1` digits, with an optional `0b` prefix and `_` separators.
impl FromStr for BitString {
    type Err = BitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s.strip_prefix("0b").unwrap_or(s);
        let mut out = BitString::new();
        for c in digits.chars() {
            match c {
                '0' => out.push(false),
                '1' => out.push(true),
                '_' => {}
                other => return Err(BitsError::Digit(other)),
            }
        }
        Ok(out)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        BitString::from_hex(&s).map_err(serde::de::Error::custom)
    }
}
