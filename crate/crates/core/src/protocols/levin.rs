//! Levin-search key agreement.
//!
//! Each side samples a length in `1..=2n` and a program of that length,
//! and the two programs interact on the toy machine for `T(n)` moves per
//! side; a program that has stopped replies 0. Alice then sends a random
//! `k x n` matrix `h` and `h(x)` with `k = ceil((c + 5) log2 n)` while Bob
//! replies 0, except that his reply to the last bit says whether
//! `h(y) = h(x)`. On a mismatch both output the empty string.
//!
//! Outputs are hashed in the injective form `x 1 0^(n-1-|x|)`, so program
//! outputs are capped at `n - 1` bits. A program that does not halt within
//! `T(n)` steps outputs the empty string.
//!
//! Randomness layout per side: `ceil(log2 2n)` bits for the length (read
//! as `v mod 2n + 1`), then `2n` program bits of which the first `l` are
//! used; Alice additionally reads `k n` matrix bits.

use super::simple::alice_bits;
use super::{Move, Outcome, Party, ProtocolSpec};
use crate::bitcore::{ceil_log2, BitString};
use crate::error::{Error, Result};
use crate::hashing::distribution::{ratio_u, Ratio};
use crate::hashing::MatrixHash;
use crate::toyvm::{run_interactive, Event, Machine, Side, TimePreset, ToyProgram, VmLimits};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevinSearch {
    pub c: f64,
    pub time: TimePreset,
}

/// Sizes of the protocol at one `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LevinLayout {
    pub n: usize,
    /// Moves per side in the program phase.
    pub t: u64,
    pub k: usize,
    pub rho: usize,
    pub len_bits: usize,
    pub prog_bits: usize,
}

impl LevinLayout {
    pub fn program_transcript_len(&self) -> usize {
        2 * self.t as usize
    }

    pub fn hash_bits(&self) -> usize {
        self.k * self.rho
    }

    pub fn total_len(&self) -> usize {
        self.program_transcript_len() + 2 * (self.hash_bits() + self.k)
    }

    pub fn limits(&self) -> VmLimits {
        VmLimits::new(self.t, self.n - 1, 2 * self.t as usize + 2)
    }
}

/// `ceil((c + 5) log2 n)`.
pub fn hash_len(c: f64, n: usize) -> usize {
    let v = (c + 5.0) * (n as f64).log2();
    // Exact products such as 6 * 4 must not round up.
    (v - 1e-9).ceil().max(0.0) as usize
}

/// `x 1 0^(width - 1 - |x|)` packed MSB-first.
pub fn pad_key(x: &BitString, width: usize) -> u64 {
    assert!(x.len() < width && width <= 64);
    let mut p = x.clone();
    p.push(true);
    p.extend_from(&BitString::zeros(width - p.len()));
    p.to_u64()
}

/// `pi` followed by Alice sending `h` then `h(x)` with Bob replying 0,
/// Bob's last reply being `accept`.
pub fn append_hash_phase(pi: &BitString, h: &MatrixHash, hx: &BitString, accept: bool) -> BitString {
    let blob = h.to_bits().concat(hx);
    let mut out = pi.clone();
    for (i, &b) in blob.bits().iter().enumerate() {
        out.push(b);
        out.push(if i + 1 == blob.len() { accept } else { false });
    }
    out
}

impl LevinSearch {
    pub fn new(c: f64, time: TimePreset) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("c must be a finite non-negative number, got {c}")));
        }
        Ok(Self { c, time })
    }

    pub fn layout(&self, n: usize) -> LevinLayout {
        LevinLayout {
            n,
            t: self.time.steps(n),
            k: hash_len(self.c, n),
            rho: n,
            len_bits: ceil_log2(2 * n as u64) as usize,
            prog_bits: 2 * n,
        }
    }

    /// Exact probability that unequal outputs survive the check: `2^-k`.
    pub fn collision_probability(&self, n: usize) -> Ratio {
        ratio_u(1, 1u64 << self.layout(n).k)
    }

    /// Exact lower bound on agreement.
    pub fn agreement_lower_bound(&self, n: usize) -> Ratio {
        Ratio::from_integer(1.into()) - self.collision_probability(n)
    }

    /// Program encoded in one side's randomness.
    pub fn program(&self, n: usize, rand: &BitString) -> ToyProgram {
        let lay = self.layout(n);
        let v = rand.slice(0, lay.len_bits).to_u64();
        let len = (v % (2 * n as u64)) as usize + 1;
        ToyProgram::new(rand.slice(lay.len_bits, lay.len_bits + len))
    }

    pub fn hash(&self, n: usize, rand_a: &BitString) -> MatrixHash {
        let lay = self.layout(n);
        let start = lay.len_bits + lay.prog_bits;
        MatrixHash::from_bits(lay.k, lay.rho, &rand_a.slice(start, start + lay.hash_bits()))
            .expect("layout widths")
    }
}

struct LevinParty {
    side: Side,
    machine: Machine<'static>,
    lay: LevinLayout,
    hash: Option<MatrixHash>,
    moves: usize,
    key: Option<BitString>,
}

impl LevinParty {
    fn incoming(&self, t: &BitString) -> Vec<bool> {
        let start = match self.side {
            Side::A => 1,
            Side::B => 0,
        };
        t.bits().iter().skip(start).step_by(2).copied().collect()
    }

    fn settle(&mut self, t: &BitString) -> BitString {
        let incoming = self.incoming(t);
        let limits = self.lay.limits();
        while !self.machine.is_done() {
            // Out of steps by now; this only records the stop.
            let _ = self.machine.run(&incoming, &[], &limits);
        }
        if self.machine.halted() {
            self.machine.output().clone()
        } else {
            BitString::new()
        }
    }
}

impl Party for LevinParty {
    fn next(&mut self, t: &BitString) -> Move {
        let i = self.moves;
        self.moves += 1;
        let lay = self.lay;
        let tt = lay.t as usize;
        if i < tt {
            let incoming = self.incoming(t);
            return match self.machine.run(&incoming, &[], &lay.limits()) {
                Event::Sent(b) => Move::Send(b),
                _ => Move::Send(false),
            };
        }
        if i == tt {
            self.key = Some(self.settle(t));
        }
        let key = self.key.clone().unwrap_or_default();
        let phase = i - tt;
        let blob_len = lay.hash_bits() + lay.k;
        if phase == blob_len {
            let accept = t.get(t.len() - 1).unwrap_or(false);
            return Move::Done(if accept { key } else { BitString::new() });
        }
        match self.side {
            Side::A => {
                let h = self.hash.as_ref().expect("alice holds the hash");
                let hx = BitString::from_u64(h.apply_packed(pad_key(&key, lay.rho)), lay.k);
                Move::Send(h.to_bits().concat(&hx).get(phase).expect("phase in range"))
            }
            Side::B => {
                if phase + 1 < blob_len {
                    return Move::Send(false);
                }
                let sent = alice_bits(t);
                let start = tt;
                let h = MatrixHash::from_bits(lay.k, lay.rho, &sent.slice(start, start + lay.hash_bits()))
                    .expect("layout widths");
                let hx = sent.slice(start + lay.hash_bits(), start + blob_len).to_u64();
                Move::Send(h.apply_packed(pad_key(&key, lay.rho)) == hx)
            }
        }
    }
}

impl ProtocolSpec for LevinSearch {
    fn name(&self) -> String {
        "levin".into()
    }

    fn validate(&self, n: usize) -> Result<()> {
        if !(2..=64).contains(&n) {
            return Err(Error::InvalidParameter(format!("Levin search needs 2 <= n <= 64, got {n}")));
        }
        Ok(())
    }

    fn rand_len_a(&self, n: usize) -> usize {
        let l = self.layout(n);
        l.len_bits + l.prog_bits + l.hash_bits()
    }

    fn rand_len_b(&self, n: usize) -> usize {
        let l = self.layout(n);
        l.len_bits + l.prog_bits
    }

    fn runtime_bound(&self, n: usize) -> u64 {
        let l = self.layout(n);
        l.t + (l.hash_bits() + l.k) as u64 + 1
    }

    fn party(&self, side: Side, n: usize, rand: &BitString) -> Box<dyn Party + '_> {
        Box::new(LevinParty {
            side,
            machine: Machine::owned(self.program(n, rand).ops(), true),
            lay: self.layout(n),
            hash: (side == Side::A).then(|| self.hash(n, rand)),
            moves: 0,
            key: None,
        })
    }

    fn fast_outcome(&self, n: usize, rand_a: &BitString, rand_b: &BitString) -> Option<Result<Outcome>> {
        if let Err(e) = self.validate(n) {
            return Some(Err(e));
        }
        let lay = self.layout(n);
        let run = run_interactive(&self.program(n, rand_a), &self.program(n, rand_b), &lay.limits());
        let mut pi = run.transcript.clone();
        pi.extend_from(&BitString::zeros(lay.program_transcript_len() - pi.len()));
        let x = if run.halted_a { run.out_a } else { BitString::new() };
        let y = if run.halted_b { run.out_b } else { BitString::new() };
        let h = self.hash(n, rand_a);
        let hx = h.apply_packed(pad_key(&x, lay.rho));
        let accept = h.apply_packed(pad_key(&y, lay.rho)) == hx;
        let transcript = append_hash_phase(&pi, &h, &BitString::from_u64(hx, lay.k), accept);
        let moves = self.runtime_bound(n);
        let (x, y) = if accept { (x, y) } else { (BitString::new(), BitString::new()) };
        Some(Ok(Outcome { transcript, x, y, steps_a: moves, steps_b: moves }))
    }
}
