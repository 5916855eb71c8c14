//! Small protocols used as fixtures and as building blocks.

use super::{Move, Party, ProtocolSpec};
use crate::bitcore::BitString;
use crate::toyvm::Side;

/// Sends a fixed bit list, then outputs `finish(transcript)`.
pub struct Scripted<F: Fn(&BitString) -> BitString> {
    bits: Vec<bool>,
    next: usize,
    finish: F,
}

impl<F: Fn(&BitString) -> BitString> Scripted<F> {
    pub fn new(bits: Vec<bool>, finish: F) -> Self {
        Self { bits, next: 0, finish }
    }
}

impl<F: Fn(&BitString) -> BitString> Party for Scripted<F> {
    fn next(&mut self, transcript: &BitString) -> Move {
        match self.bits.get(self.next) {
            Some(&b) => {
                self.next += 1;
                Move::Send(b)
            }
            None => Move::Done((self.finish)(transcript)),
        }
    }
}

/// Bits at Alice's positions of `t`.
pub fn alice_bits(t: &BitString) -> BitString {
    BitString::from_bits(t.bits().iter().step_by(2).copied().collect())
}

/// Bits at Bob's positions of `t`.
pub fn bob_bits(t: &BitString) -> BitString {
    BitString::from_bits(t.bits().iter().skip(1).step_by(2).copied().collect())
}

/// No randomness, no messages, empty keys.
#[derive(Clone, Copy, Debug, Default)]
pub struct Null;

impl ProtocolSpec for Null {
    fn name(&self) -> String {
        "null".into()
    }
    fn rand_len_a(&self, _n: usize) -> usize {
        0
    }
    fn rand_len_b(&self, _n: usize) -> usize {
        0
    }
    fn runtime_bound(&self, _n: usize) -> u64 {
        1
    }
    fn party(&self, _side: Side, _n: usize, _rand: &BitString) -> Box<dyn Party + '_> {
        Box::new(Scripted::new(Vec::new(), |_| BitString::new()))
    }
}

/// Each side outputs its own random bit without talking.
#[derive(Clone, Copy, Debug, Default)]
pub struct Coinflip;

impl ProtocolSpec for Coinflip {
    fn name(&self) -> String {
        "coinflip".into()
    }
    fn rand_len_a(&self, _n: usize) -> usize {
        1
    }
    fn rand_len_b(&self, _n: usize) -> usize {
        1
    }
    fn runtime_bound(&self, _n: usize) -> u64 {
        1
    }
    fn party(&self, _side: Side, _n: usize, rand: &BitString) -> Box<dyn Party + '_> {
        let r = rand.clone();
        Box::new(Scripted::new(Vec::new(), move |_| r.clone()))
    }
}

/// Alice sends her randomness ANDed with 0, so every run looks the same.
#[derive(Clone, Copy, Debug)]
pub struct ZeroMask {
    pub len: usize,
}

impl ZeroMask {
    pub fn new(len: usize) -> Self {
        Self { len }
    }
}

impl ProtocolSpec for ZeroMask {
    fn name(&self) -> String {
        "zeromask".into()
    }
    fn rand_len_a(&self, _n: usize) -> usize {
        self.len
    }
    fn rand_len_b(&self, _n: usize) -> usize {
        0
    }
    fn runtime_bound(&self, _n: usize) -> u64 {
        self.len as u64 + 1
    }
    fn party(&self, side: Side, _n: usize, rand: &BitString) -> Box<dyn Party + '_> {
        let bits = match side {
            Side::A => rand.bits().iter().map(|&b| b & false).collect(),
            Side::B => Vec::new(),
        };
        Box::new(Scripted::new(bits, |_| BitString::new()))
    }
}

/// Alice announces her randomness and both output it.
#[derive(Clone, Copy, Debug)]
pub struct Transparent {
    pub len: usize,
}

impl Transparent {
    pub fn new(len: usize) -> Self {
        Self { len }
    }
}

impl ProtocolSpec for Transparent {
    fn name(&self) -> String {
        "transparent".into()
    }
    fn rand_len_a(&self, _n: usize) -> usize {
        self.len
    }
    fn rand_len_b(&self, _n: usize) -> usize {
        0
    }
    fn runtime_bound(&self, _n: usize) -> u64 {
        self.len as u64 + 1
    }
    fn party(&self, side: Side, _n: usize, rand: &BitString) -> Box<dyn Party + '_> {
        match side {
            Side::A => {
                let r = rand.clone();
                Box::new(Scripted::new(rand.bits().to_vec(), move |_| r.clone()))
            }
            Side::B => {
                let len = self.len;
                Box::new(Scripted::new(vec![false; len], alice_bits))
            }
        }
    }
}
