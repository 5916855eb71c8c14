//! Bit strings, the self-delimiting pair encoding and pair padding.
//!
//! A pair `(pi, x)` is written as `0 pi_1 0 pi_2 ... 0 pi_m 1 x`, so its
//! encoded length is `2|pi| + 1 + |x|`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A finite sequence of bits ordered lexicographically.
///
/// At equal length the order agrees with the numeric value of the string
/// read most-significant-bit first.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn zeros(len: usize) -> Self {
        Self { bits: vec![false; len] }
    }

    /// The `len` low bits of `value`, most significant first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 bits");
        let bits = (0..len).rev().map(|i| (value >> i) & 1 == 1).collect();
        Self { bits }
    }

    /// Numeric value, most significant bit first. Panics above 64 bits.
    pub fn to_u64(&self) -> u64 {
        assert!(self.bits.len() <= 64, "to_u64 supports at most 64 bits");
        self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    /// All strings of length `len` in increasing order.
    pub fn all_of_len(len: usize) -> impl Iterator<Item = BitString> {
        assert!(len < 64);
        (0..1u64 << len).map(move |v| BitString::from_u64(v, len))
    }

    /// All strings of length at most `max_len`, shortest first.
    pub fn all_up_to(max_len: usize) -> impl Iterator<Item = BitString> {
        (0..=max_len).flat_map(BitString::all_of_len)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.bits.get(i).copied()
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.bits.extend_from_slice(&other.bits);
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        out.extend_from(other);
        out
    }

    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        other.bits.starts_with(&self.bits)
    }

    pub fn slice(&self, start: usize, end: usize) -> BitString {
        BitString::from_bits(self.bits[start..end].to_vec())
    }

    pub fn truncated(&self, len: usize) -> BitString {
        BitString::from_bits(self.bits[..len.min(self.len())].to_vec())
    }

    /// Inner product over GF(2). Panics on length mismatch.
    pub fn dot(&self, other: &BitString) -> bool {
        assert_eq!(self.len(), other.len(), "inner product of unequal lengths");
        self.bits
            .iter()
            .zip(&other.bits)
            .fold(false, |acc, (&a, &b)| acc ^ (a & b))
    }

    pub fn xor(&self, other: &BitString) -> BitString {
        assert_eq!(self.len(), other.len(), "xor of unequal lengths");
        BitString::from_bits(
            self.bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| a ^ b)
                .collect(),
        )
    }

    /// Canonical byte form: u32 little-endian bit length, then the bits
    /// packed MSB-first into `ceil(len / 8)` bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + self.len().div_ceil(8));
        out.extend_from_slice(&(self.len() as u32).to_le_bytes());
        for chunk in self.bits.chunks(8) {
            let mut byte = 0u8;
            for (i, &b) in chunk.iter().enumerate() {
                if b {
                    byte |= 0x80 >> i;
                }
            }
            out.push(byte);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let header: [u8; 4] = bytes
            .get(..4)
            .and_then(|h| h.try_into().ok())
            .ok_or_else(|| Error::Malformed("missing bit-length header".into()))?;
        let len = u32::from_le_bytes(header) as usize;
        let body = &bytes[4..];
        if body.len() != len.div_ceil(8) {
            return Err(Error::Malformed(format!(
                "expected {} payload bytes for {} bits, found {}",
                len.div_ceil(8),
                len,
                body.len()
            )));
        }
        let bits = (0..len).map(|i| body[i / 8] & (0x80 >> (i % 8)) != 0).collect();
        Ok(Self { bits })
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Malformed(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString::from_bits)
    }
}

impl From<Vec<bool>> for BitString {
    fn from(bits: Vec<bool>) -> Self {
        Self { bits }
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Shorthand for parsing a literal bit string; panics on bad input.
pub fn bits(s: &str) -> BitString {
    s.parse().expect("bit-string literal")
}

/// A pair together with its self-delimiting encoding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCode {
    pub pi: BitString,
    pub x: BitString,
    pub encoded: BitString,
}

impl PairCode {
    /// `|(pi, x)| = 2|pi| + 1 + |x|`.
    pub fn len(&self) -> usize {
        self.encoded.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn from_encoded(code: BitString) -> Result<Self> {
        let (pi, x) = decode_pair(&code)?;
        Ok(Self { pi, x, encoded: code })
    }
}

/// Encoded length of a pair without building it.
pub fn pair_len(pi_len: usize, x_len: usize) -> usize {
    2 * pi_len + 1 + x_len
}

pub fn encode_pair(pi: &BitString, x: &BitString) -> PairCode {
    let mut encoded = BitString::new();
    for &b in pi.bits() {
        encoded.push(false);
        encoded.push(b);
    }
    encoded.push(true);
    encoded.extend_from(x);
    PairCode {
        pi: pi.clone(),
        x: x.clone(),
        encoded,
    }
}

pub fn decode_pair(code: &BitString) -> Result<(BitString, BitString)> {
    let b = code.bits();
    let mut pi = BitString::new();
    let mut i = 0;
    while i < b.len() {
        if b[i] {
            return Ok((pi, code.slice(i + 1, b.len())));
        }
        match b.get(i + 1) {
            Some(&bit) => pi.push(bit),
            None => break,
        }
        i += 2;
    }
    Err(Error::MalformedPairCode(code.to_string()))
}

/// Pads `(pi, z)` to the pair `(pi 1 0^k, z')` of encoded length exactly
/// `ell`, where `z'` is `z` or `z` followed by a single 0 bit.
///
/// The parity of `ell - |(pi, z)|` fixes both `k` and whether `z` is
/// extended, so the solution is unique.
pub fn pad_pair(pi: &BitString, z: &BitString, ell: usize) -> Result<PairCode> {
    let base = pair_len(pi.len(), z.len());
    if ell < base + 2 {
        return Err(Error::PadTooSmall { needed: base + 2, requested: ell });
    }
    let slack = ell - base - 2;
    let (k, extend) = (slack / 2, slack % 2 == 1);
    let mut padded_pi = pi.clone();
    padded_pi.push(true);
    padded_pi.extend_from(&BitString::zeros(k));
    let mut padded_z = z.clone();
    if extend {
        padded_z.push(false);
    }
    let code = encode_pair(&padded_pi, &padded_z);
    debug_assert_eq!(code.len(), ell);
    Ok(code)
}

/// Ceiling of log2, with `ceil_log2(0) = ceil_log2(1) = 0`.
pub fn ceil_log2(v: u64) -> u32 {
    if v <= 1 {
        0
    } else {
        64 - (v - 1).leading_zeros()
    }
}
