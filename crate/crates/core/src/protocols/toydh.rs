//! Diffie–Hellman over `Z_11^*` with generator 2.
//!
//! Each side reads `SLOTS` 4-bit slots. Its exponent is the first slot whose
//! value lies in `1..=10`; if none does, it is `(slot_1 mod 10) + 1`. So the
//! randomness length is fixed while every exponent stays reachable.
//!
//! Alice sends `2^a mod 11` in 4 bits while Bob replies 0, then Bob sends
//! `2^b mod 11` while Alice replies 0. The key `2^(ab) mod 11`, in 4 bits,
//! is truncated or zero-padded to `n - 33` bits so that `|(pi, x)| = n`.

use super::simple::{alice_bits, bob_bits, Scripted};
use super::{Party, ProtocolSpec};
use crate::bitcore::{pair_len, BitString};
use crate::toyvm::Side;

pub const P: u64 = 11;
pub const G: u64 = 2;
pub const SLOT_BITS: usize = 4;
pub const SLOTS: usize = 3;
/// Message bits per side.
pub const MSG_BITS: usize = 4;
/// Transcript length: both messages with interleaved replies.
pub const PI_LEN: usize = 4 * MSG_BITS;

pub fn pow_mod(base: u64, exp: u64, m: u64) -> u64 {
    let (mut r, mut b, mut e) = (1 % m, base % m, exp);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// Exponent selected by the redraw table.
pub fn exponent(rand: &BitString) -> u64 {
    assert_eq!(rand.len(), SLOT_BITS * SLOTS);
    let slots: Vec<u64> = (0..SLOTS)
        .map(|i| rand.slice(i * SLOT_BITS, (i + 1) * SLOT_BITS).to_u64())
        .collect();
    slots
        .iter()
        .copied()
        .find(|v| (1..P).contains(v))
        .unwrap_or(slots[0] % (P - 1) + 1)
}

/// Canonical randomness for exponent `e`: first slot `e`, the rest zero.
pub fn canonical_rand(e: u64) -> BitString {
    let mut r = BitString::from_u64(e, SLOT_BITS);
    r.extend_from(&BitString::zeros(SLOT_BITS * (SLOTS - 1)));
    r
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ToyDh;

impl ToyDh {
    pub fn key_len(n: usize) -> usize {
        n.saturating_sub(pair_len(PI_LEN, 0))
    }

    /// The 4-bit shared value fitted to `len` bits.
    pub fn fit_key(value: u64, len: usize) -> BitString {
        let full = BitString::from_u64(value, MSG_BITS);
        if len <= MSG_BITS {
            full.truncated(len)
        } else {
            full.concat(&BitString::zeros(len - MSG_BITS))
        }
    }

    /// Smallest `n` at which the key keeps all 4 bits.
    pub fn full_key_n() -> usize {
        pair_len(PI_LEN, MSG_BITS)
    }
}

impl ProtocolSpec for ToyDh {
    fn name(&self) -> String {
        "toydh".into()
    }
    fn rand_len_a(&self, _n: usize) -> usize {
        SLOT_BITS * SLOTS
    }
    fn rand_len_b(&self, _n: usize) -> usize {
        SLOT_BITS * SLOTS
    }
    fn runtime_bound(&self, _n: usize) -> u64 {
        (2 * MSG_BITS + 1) as u64
    }

    fn party(&self, side: Side, n: usize, rand: &BitString) -> Box<dyn Party + '_> {
        let e = exponent(rand);
        let msg = BitString::from_u64(pow_mod(G, e, P), MSG_BITS);
        let key_len = Self::key_len(n);
        let silent = [false; MSG_BITS];
        let finish = move |theirs: BitString| {
            Self::fit_key(pow_mod(theirs.to_u64(), e, P), key_len)
        };
        match side {
            Side::A => {
                let bits = [msg.bits(), &silent[..]].concat();
                Box::new(Scripted::new(bits, move |t| finish(bob_bits(t).slice(MSG_BITS, 2 * MSG_BITS))))
            }
            Side::B => {
                let bits = [&silent[..], msg.bits()].concat();
                Box::new(Scripted::new(bits, move |t| finish(alice_bits(t).truncated(MSG_BITS))))
            }
        }
    }

    fn effective_domain(&self, _n: usize) -> Option<Vec<(BitString, BitString)>> {
        let mut out = Vec::new();
        for a in 1..P {
            for b in 1..P {
                out.push((canonical_rand(a), canonical_rand(b)));
            }
        }
        Some(out)
    }
}
