//! Golden complexity tables: `[{pi, x, t_steps, max_len, value}, ...]`.

use serde::{Deserialize, Serialize};

use super::complexity::{interactive_complexity, plain_complexity, ComplexityValue, SearchBudget};
use super::vm::VmLimits;
use crate::bitcore::{ceil_log2, encode_pair, BitString};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenEntry {
    pub pi: BitString,
    pub x: BitString,
    pub t_steps: u64,
    pub max_len: usize,
    pub value: ComplexityValue,
}

pub fn to_json(entries: &[GoldenEntry]) -> String {
    serde_json::to_string_pretty(entries).expect("golden entries serialize")
}

pub fn from_json(s: &str) -> Result<Vec<GoldenEntry>> {
    serde_json::from_str(s).map_err(|e| Error::Malformed(e.to_string()))
}

/// Interactive complexity of every pair with `|pi|, |x| <= max_part`.
pub fn interactive_table(
    max_part: usize,
    limits: &VmLimits,
    max_len: usize,
    budget: &SearchBudget,
) -> Result<Vec<GoldenEntry>> {
    let mut out = Vec::new();
    for pi in BitString::all_up_to(max_part) {
        for x in BitString::all_up_to(max_part) {
            let value = interactive_complexity(&pi, &x, limits, max_len, budget)?;
            out.push(GoldenEntry { pi: pi.clone(), x, t_steps: limits.max_steps, max_len, value });
        }
    }
    Ok(out)
}

/// Split-point description cost used by the concatenation bound:
/// `2 ceil(log2(ci + 1))` bits.
pub fn split_cost(ci: usize) -> usize {
    2 * ceil_log2(ci as u64 + 1) as usize
}

/// Smallest constant `c` with `C(pi, x) <= CI(pi, x) + split_cost + c` on
/// every entry with finite interactive complexity. The plain complexity of
/// the pair is taken of its self-delimiting code.
pub fn measure_concat_constant(
    entries: &[GoldenEntry],
    limits: &VmLimits,
    plain_max_len: usize,
    budget: &SearchBudget,
) -> Result<i64> {
    let mut worst = i64::MIN;
    for e in entries {
        let Some(ci) = e.value.finite() else { continue };
        let code = encode_pair(&e.pi, &e.x).encoded;
        let c = plain_complexity(&code, &BitString::new(), limits, plain_max_len, budget)?;
        let c = c.finite().ok_or_else(|| {
            Error::InvalidParameter(format!("plain search bound {plain_max_len} too small for {code}"))
        })?;
        worst = worst.max(c as i64 - ci as i64 - split_cost(ci) as i64);
    }
    Ok(worst.max(0))
}
