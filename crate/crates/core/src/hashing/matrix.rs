//! The universal family `H_{rho,k} = { a -> M a : M in {0,1}^{k x rho} }`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitcore::BitString;
use crate::error::{Error, Result};

/// Largest input width supported by the packed row representation.
pub const MAX_COLS: usize = 64;

/// One member of `H_{rho,k}`: a `k x rho` matrix over GF(2).
///
/// Rows are packed so that column `j` is bit `rho - 1 - j`, which matches
/// [`BitString::to_u64`] on inputs of length `rho`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MatrixHash {
    rows: Vec<u64>,
    cols: usize,
}

impl MatrixHash {
    pub fn zero(k: usize, rho: usize) -> Self {
        assert!(rho <= MAX_COLS);
        Self { rows: vec![0; k], cols: rho }
    }

    /// Square identity.
    pub fn identity(rho: usize) -> Self {
        assert!(rho <= MAX_COLS);
        Self {
            rows: (0..rho).map(|i| 1u64 << (rho - 1 - i)).collect(),
            cols: rho,
        }
    }

    pub fn from_rows(rows: Vec<u64>, rho: usize) -> Result<Self> {
        if rho > MAX_COLS {
            return Err(Error::InvalidParameter(format!("rho = {rho} exceeds {MAX_COLS}")));
        }
        let mask = col_mask(rho);
        if rows.iter().any(|&r| r & !mask != 0) {
            return Err(Error::InvalidParameter("row has bits beyond rho columns".into()));
        }
        Ok(Self { rows, cols: rho })
    }

    /// Matrix number `index` in the enumeration of `H_{rho,k}`: the
    /// row-major serialization read as a binary number.
    pub fn from_index(k: usize, rho: usize, index: u64) -> Self {
        assert!(k * rho < 64, "family too large to index");
        let mask = col_mask(rho);
        let rows = (0..k)
            .map(|i| (index >> ((k - 1 - i) * rho)) & mask)
            .collect();
        Self { rows, cols: rho }
    }

    /// Uniformly random member of `H_{rho,k}`.
    pub fn random<R: Rng + ?Sized>(k: usize, rho: usize, rng: &mut R) -> Self {
        assert!(rho <= MAX_COLS);
        let mask = col_mask(rho);
        let rows = (0..k).map(|_| rng.gen::<u64>() & mask).collect();
        Self { rows, cols: rho }
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_bits(&self) -> &[u64] {
        &self.rows
    }

    /// Row-major serialization of length `rho * k`.
    pub fn to_bits(&self) -> BitString {
        let mut out = BitString::new();
        for &r in &self.rows {
            out.extend_from(&BitString::from_u64(r, self.cols));
        }
        out
    }

    pub fn from_bits(k: usize, rho: usize, bits: &BitString) -> Result<Self> {
        if bits.len() != k * rho {
            return Err(Error::LengthMismatch { expected: k * rho, got: bits.len() });
        }
        let rows = (0..k).map(|i| bits.slice(i * rho, (i + 1) * rho).to_u64()).collect();
        Self::from_rows(rows, rho)
    }

    /// `M a` on a packed input.
    pub fn apply_packed(&self, a: u64) -> u64 {
        self.rows
            .iter()
            .fold(0u64, |acc, &r| (acc << 1) | ((r & a).count_ones() as u64 & 1))
    }

    pub fn apply(&self, a: &BitString) -> Result<BitString> {
        if a.len() != self.cols {
            return Err(Error::LengthMismatch { expected: self.cols, got: a.len() });
        }
        Ok(BitString::from_u64(self.apply_packed(a.to_u64()), self.rows()))
    }
}

fn col_mask(rho: usize) -> u64 {
    if rho == 64 {
        u64::MAX
    } else {
        (1u64 << rho) - 1
    }
}

/// `H_{rho,k}` as an enumerable family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixFamily {
    pub rho: usize,
    pub k: usize,
}

impl MatrixFamily {
    pub fn new(rho: usize, k: usize) -> Self {
        Self { rho, k }
    }

    /// `log2 |H|`.
    pub fn log_size(&self) -> usize {
        self.rho * self.k
    }

    pub fn size(&self) -> u64 {
        1u64 << self.log_size()
    }

    pub fn range_size(&self) -> u64 {
        1u64 << self.k
    }

    pub fn members(&self) -> impl Iterator<Item = MatrixHash> + '_ {
        (0..self.size()).map(move |i| MatrixHash::from_index(self.k, self.rho, i))
    }
}

pub fn hash_apply(h: &MatrixHash, a: &BitString) -> Result<BitString> {
    h.apply(a)
}

/// `min { a in A : h(a) = w }`, or `None` when no member of `A` hashes to `w`.
pub fn pseudo_inverse(h: &MatrixHash, set: &[BitString], w: &BitString) -> Result<Option<BitString>> {
    if w.len() != h.rows() {
        return Err(Error::LengthMismatch { expected: h.rows(), got: w.len() });
    }
    let mut best: Option<&BitString> = None;
    for a in set {
        if h.apply(a)? == *w && best.is_none_or(|b| a < b) {
            best = Some(a);
        }
    }
    Ok(best.cloned())
}

/// Packed variant over a set of `rho`-bit values.
pub fn pseudo_inverse_packed(h: &MatrixHash, set: &[u64], w: u64) -> Option<u64> {
    set.iter().copied().filter(|&a| h.apply_packed(a) == w).min()
}

/// Fraction of `H_{rho,k}` on which `a` and `a2` collide, by enumeration.
pub fn collision_fraction(family: MatrixFamily, a: u64, a2: u64) -> (u64, u64) {
    let hits = family
        .members()
        .filter(|h| h.apply_packed(a) == h.apply_packed(a2))
        .count() as u64;
    (hits, family.size())
}

/// Collision probability of two inputs under a uniform member of
/// `H_{rho,k}`, as `(numerator, log2 denominator)`.
///
/// For `a != a2` each row meets `a xor a2` in a uniform bit, independently
/// across rows, so the probability is `2^-k`.
pub fn exact_collision_probability(k: usize, a: u64, a2: u64) -> (u64, usize) {
    if a == a2 {
        (1, 0)
    } else {
        (1, k)
    }
}
