//! Hash embedding in transcripts and the breaker predicate `E`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::decider::{Decider, PromiseParams, Verdict};
use crate::bitcore::{ceil_log2, pad_pair, pair_len, BitString, PairCode};
use crate::error::{Error, Result};
use crate::hashing::MatrixHash;
use crate::protocols::random_bits;
use crate::seed::{derive, rng_from, streams};

/// Width of each of the two header fields for domain size `rho`.
pub fn header_field_bits(rho: usize) -> usize {
    ceil_log2(rho as u64 + 1) as usize
}

/// `(rho, k)` in fixed-width fields, then the matrix row-major.
pub fn serialize_hash(h: &MatrixHash) -> BitString {
    let w = header_field_bits(h.cols());
    let mut out = BitString::from_u64(h.cols() as u64, w);
    out.extend_from(&BitString::from_u64(h.rows() as u64, w));
    out.extend_from(&h.to_bits());
    out
}

fn interleave(out: &mut BitString, s: &BitString, alice: bool) {
    for &b in s.bits() {
        if alice {
            out.push(b);
            out.push(false);
        } else {
            out.push(false);
            out.push(b);
        }
    }
}

/// `pi<h, g, w, v>`: after `pi`, Alice sends `h` while Bob replies 0, Bob
/// sends `g`, Alice sends `w`, Bob sends `v`.
pub fn embed_transcript(pi: &BitString, h: &MatrixHash, g: &MatrixHash, w: &BitString, v: &BitString) -> Result<BitString> {
    if w.len() != h.rows() {
        return Err(Error::LengthMismatch { expected: h.rows(), got: w.len() });
    }
    if v.len() != g.rows() {
        return Err(Error::LengthMismatch { expected: g.rows(), got: v.len() });
    }
    let mut out = pi.clone();
    interleave(&mut out, &serialize_hash(h), true);
    interleave(&mut out, &serialize_hash(g), false);
    interleave(&mut out, w, true);
    interleave(&mut out, v, false);
    Ok(out)
}

/// Bits added by [`embed_transcript`].
pub fn embedding_len(rho_h: usize, k_h: usize, rho_g: usize, k_g: usize) -> usize {
    let hdr = |rho| 2 * header_field_bits(rho);
    2 * (hdr(rho_h) + rho_h * k_h + hdr(rho_g) + rho_g * k_g + k_h + k_g)
}

/// The four parts embedded after the first `pi_len` bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedded {
    pub pi: BitString,
    pub h: MatrixHash,
    pub g: MatrixHash,
    pub w: BitString,
    pub v: BitString,
    /// Whatever follows the embedding.
    pub rest: BitString,
}

/// Inverse of [`embed_transcript`] given `|pi|` and the domain size.
pub fn parse_embedding(t: &BitString, pi_len: usize, rho: usize) -> Result<Embedded> {
    let bad = || Error::Malformed(format!("transcript of {} bits holds no embedding at {pi_len}", t.len()));
    let mut pos = pi_len;
    let mut take = |count: usize, alice: bool| -> Result<BitString> {
        if pos + 2 * count > t.len() {
            return Err(bad());
        }
        let off = if alice { 0 } else { 1 };
        let s = BitString::from_bits((0..count).map(|i| t.bits()[pos + 2 * i + off]).collect());
        pos += 2 * count;
        Ok(s)
    };
    let w_bits = header_field_bits(rho);
    let hash = |alice: bool, take: &mut dyn FnMut(usize, bool) -> Result<BitString>| -> Result<MatrixHash> {
        let hdr = take(2 * w_bits, alice)?;
        let (r, k) = (hdr.slice(0, w_bits).to_u64() as usize, hdr.slice(w_bits, 2 * w_bits).to_u64() as usize);
        if r != rho || k > rho {
            return Err(Error::Malformed(format!("hash header ({r}, {k}) does not fit rho = {rho}")));
        }
        MatrixHash::from_bits(k, rho, &take(k * rho, alice)?)
    };
    let h = hash(true, &mut take)?;
    let g = hash(false, &mut take)?;
    let w = take(h.rows(), true)?;
    let v = take(g.rows(), false)?;
    Ok(Embedded {
        pi: t.truncated(pi_len),
        h,
        g,
        w,
        v,
        rest: t.slice(pos, t.len()),
    })
}

/// Target length of the padded pair: `2n`, or `2n + 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    #[default]
    Even,
    Odd,
}

impl Parity {
    pub fn target(self, n: usize) -> usize {
        match self {
            Parity::Even => 2 * n,
            Parity::Odd => 2 * n + 1,
        }
    }
}

impl std::str::FromStr for Parity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" => Ok(Parity::Even),
            "odd" => Ok(Parity::Odd),
            other => Err(Error::InvalidParameter(format!("parity must be even or odd, got {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreakerConfig {
    pub epsilon: f64,
    pub parity: Parity,
}

impl BreakerConfig {
    pub fn new(epsilon: f64, parity: Parity) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        Ok(Self { epsilon, parity })
    }

    /// `rho = max(1, floor(n^epsilon))`.
    pub fn rho(&self, n: usize) -> usize {
        ((n as f64).powf(self.epsilon) + 1e-9).floor().max(1.0) as usize
    }

    /// Asymptotic side conditions that a desk-scale run may violate.
    pub fn warnings(&self, params: Option<&PromiseParams>, d: Option<f64>) -> Vec<String> {
        let eps = self.epsilon;
        let mut w = Vec::new();
        if eps >= 0.5 {
            w.push(format!("epsilon = {eps} is not below 1/2"));
        }
        if let Some(p) = params {
            if p.c <= 3.0 + 4.0 * eps {
                w.push(format!("c = {} is not above 3 + 4 epsilon = {}", p.c, 3.0 + 4.0 * eps));
            }
            if let Some(d) = d {
                if d <= p.e + 2.0 * eps {
                    w.push(format!("d = {d} is not above e + 2 epsilon = {}", p.e + 2.0 * eps));
                }
            }
        }
        w
    }
}

/// Everything one evaluation of `E` draws.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BreakerSample {
    pub n: usize,
    pub rho: usize,
    pub alpha: usize,
    pub beta: usize,
    pub h: MatrixHash,
    pub g: MatrixHash,
    pub w: BitString,
    pub v: BitString,
    pub input: PairCode,
}

pub fn sample_breaker<R: Rng + ?Sized>(pi: &BitString, z: &BitString, cfg: &BreakerConfig, rng: &mut R) -> Result<BreakerSample> {
    let n = pair_len(pi.len(), z.len());
    let rho = cfg.rho(n);
    let alpha = rng.gen_range(1..=rho);
    let beta = rng.gen_range(1..=rho);
    let h = MatrixHash::random(alpha, rho, rng);
    let g = MatrixHash::random(beta, rho, rng);
    let w = random_bits(alpha, rng);
    let v = random_bits(beta, rng);
    let embedded = embed_transcript(pi, &h, &g, &w, &v)?;
    let target = cfg.parity.target(n);
    let input = pad_pair(&embedded, z, target).map_err(|_| Error::EmbeddingTooLong {
        needed: pair_len(embedded.len(), z.len()) + 2,
        target,
    })?;
    Ok(BreakerSample { n, rho, alpha, beta, h, g, w, v, input })
}

/// The predicate `E(pi, z)`: 1 iff the decider says "outside N" on the
/// padded embedded pair.
pub fn breaker_e(decider: &dyn Decider, pi: &BitString, z: &BitString, cfg: &BreakerConfig, seed: u64) -> Result<bool> {
    let mut rng = rng_from(derive(seed, streams::BREAKER, 0));
    let sample = sample_breaker(pi, z, cfg, &mut rng)?;
    Ok(decider.decide(&sample.input, derive(seed, streams::DECIDER, 0))? == Verdict::OutsideN)
}
