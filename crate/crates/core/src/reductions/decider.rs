//! Deciders for the promise problem `(Y^t_c, N_e)`.

use std::io::{BufRead, BufReader, Write};
use std::process::{Command, Stdio};

use serde::{Deserialize, Serialize};

use crate::bitcore::{decode_pair, PairCode};
use crate::error::{Error, Result};
use crate::seed::{derive, streams};
use crate::toyvm::{interactive_complexity, plain_complexity, ComplexityValue, SearchBudget, TimePreset, VmLimits};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    OutsideY,
    OutsideN,
}

impl std::str::FromStr for Verdict {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "outside_y" | "outside Y" => Ok(Verdict::OutsideY),
            "outside_n" | "outside N" => Ok(Verdict::OutsideN),
            other => Err(Error::Malformed(format!("unknown verdict {other:?}"))),
        }
    }
}

/// `c` and `e` of `Y^t_c` and `N_e`, and the time bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PromiseParams {
    pub c: f64,
    pub e: f64,
    pub t: TimePreset,
}

impl PromiseParams {
    pub fn new(c: f64, e: f64, t: TimePreset) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("c must be positive, got {c}")));
        }
        if !(e > c && e.is_finite()) {
            return Err(Error::InvalidParameter(format!("e must exceed c, got c = {c}, e = {e}")));
        }
        Ok(Self { c, e, t })
    }

    /// `"gap"` when `e > c + 3`, else `"narrow"`.
    pub fn regime(&self) -> &'static str {
        if self.e > self.c + 3.0 {
            "gap"
        } else {
            "narrow"
        }
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.regime() == "narrow" {
            w.push(format!("e = {} is at most c + 3 = {}", self.e, self.c + 3.0));
        }
        w
    }
}

/// A randomized procedure on pair codes. Implementations keep no state
/// between calls; all randomness comes from `seed`.
pub trait Decider: Send + Sync {
    fn name(&self) -> String;
    fn decide(&self, input: &PairCode, seed: u64) -> Result<Verdict>;

    /// Declared error probability per call.
    fn failure_probability(&self) -> f64 {
        0.0
    }

    /// Whether the error bound is claimed at input length `n`.
    fn good_length(&self, _n: usize) -> bool {
        true
    }
}

impl<D: Decider + ?Sized> Decider for &D {
    fn name(&self) -> String {
        (**self).name()
    }
    fn decide(&self, input: &PairCode, seed: u64) -> Result<Verdict> {
        (**self).decide(input, seed)
    }
    fn failure_probability(&self) -> f64 {
        (**self).failure_probability()
    }
    fn good_length(&self, n: usize) -> bool {
        (**self).good_length(n)
    }
}

impl<D: Decider + ?Sized> Decider for Box<D> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn decide(&self, input: &PairCode, seed: u64) -> Result<Verdict> {
        (**self).decide(input, seed)
    }
    fn failure_probability(&self) -> f64 {
        (**self).failure_probability()
    }
    fn good_length(&self, n: usize) -> bool {
        (**self).good_length(n)
    }
}

/// Always the same answer.
#[derive(Clone, Copy, Debug)]
pub struct ConstDecider(pub Verdict);

impl Decider for ConstDecider {
    fn name(&self) -> String {
        format!("const-{}", verdict_name(self.0))
    }
    fn decide(&self, _input: &PairCode, _seed: u64) -> Result<Verdict> {
        Ok(self.0)
    }
}

/// A closure as a decider.
pub struct FnDecider<F> {
    pub name: String,
    pub f: F,
}

impl<F: Fn(&PairCode, u64) -> Result<Verdict> + Send + Sync> FnDecider<F> {
    pub fn new(name: impl Into<String>, f: F) -> Self {
        Self { name: name.into(), f }
    }
}

impl<F: Fn(&PairCode, u64) -> Result<Verdict> + Send + Sync> Decider for FnDecider<F> {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn decide(&self, input: &PairCode, seed: u64) -> Result<Verdict> {
        (self.f)(input, seed)
    }
}

pub fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::OutsideY => "outside_y",
        Verdict::OutsideN => "outside_n",
    }
}

/// Majority of an odd number of independent calls.
pub struct Majority<D> {
    pub inner: D,
    pub reps: u32,
}

impl<D: Decider> Majority<D> {
    pub fn new(inner: D, reps: u32) -> Result<Self> {
        if reps.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("repetitions must be odd, got {reps}")));
        }
        Ok(Self { inner, reps })
    }
}

impl<D: Decider> Decider for Majority<D> {
    fn name(&self) -> String {
        format!("majority{}({})", self.reps, self.inner.name())
    }

    fn decide(&self, input: &PairCode, seed: u64) -> Result<Verdict> {
        let mut n_votes = 0;
        for i in 0..self.reps {
            if self.inner.decide(input, derive(seed, streams::DECIDER, i as u64))? == Verdict::OutsideN {
                n_votes += 1;
            }
        }
        Ok(if 2 * n_votes > self.reps { Verdict::OutsideN } else { Verdict::OutsideY })
    }

    /// Binomial tail of a majority of wrong answers.
    fn failure_probability(&self) -> f64 {
        let p = self.inner.failure_probability();
        let r = self.reps as u64;
        let mut total = 0.0;
        for k in (r / 2 + 1)..=r {
            let mut binom = 1.0;
            for j in 0..k {
                binom *= (r - j) as f64 / (j + 1) as f64;
            }
            total += binom * p.powi(k as i32) * (1.0 - p).powi((r - k) as i32);
        }
        total
    }

    fn good_length(&self, n: usize) -> bool {
        self.inner.good_length(n)
    }
}

/// Default input bound of the reference decider.
pub const REFERENCE_MAX_INPUT: usize = 6;
/// Concatenation constant of the toy machine, as stored with the golden table.
pub const MEASURED_C_VM: i64 = 9;
pub const REFERENCE_MAX_LEN: usize = 18;

/// Exact decider for tiny inputs, from toy-machine complexities.
#[derive(Clone, Debug)]
pub struct ReferenceDecider {
    pub params: PromiseParams,
    pub c_vm: i64,
    pub max_input: usize,
    pub max_len: usize,
    /// Overrides the time preset.
    pub limits: Option<VmLimits>,
    pub budget: SearchBudget,
}

/// Every quantity behind one reference decision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceDecision {
    pub n: usize,
    pub t_steps: u64,
    pub ci: ComplexityValue,
    pub c_pi: ComplexityValue,
    pub c_pair: ComplexityValue,
    /// `CI^t(pi, x) <= C(pi) + c log n + c_vm`
    pub y_test: bool,
    /// `C(pi, x) >= C(pi) + e log n - c_vm`
    pub n_test: bool,
    pub verdict: Verdict,
}

pub fn reference_decider(params: PromiseParams) -> ReferenceDecider {
    ReferenceDecider {
        params,
        c_vm: MEASURED_C_VM,
        max_input: REFERENCE_MAX_INPUT,
        max_len: REFERENCE_MAX_LEN,
        limits: None,
        budget: SearchBudget::default(),
    }
}

impl ReferenceDecider {
    pub fn with_limits(mut self, limits: VmLimits) -> Self {
        self.limits = Some(limits);
        self
    }

    pub fn with_budget(mut self, budget: SearchBudget) -> Self {
        self.budget = budget;
        self
    }

    pub fn evaluate(&self, input: &PairCode) -> Result<ReferenceDecision> {
        let n = input.len();
        if n > self.max_input {
            return Err(Error::DomainTooLarge(format!(
                "reference decider handles |(pi, x)| <= {}, got {n}",
                self.max_input
            )));
        }
        let (pi, x) = decode_pair(&input.encoded)?;
        let limits = self.limits.unwrap_or_else(|| self.params.t.limits(n));
        let empty = crate::bitcore::BitString::new();
        let ci = interactive_complexity(&pi, &x, &limits, self.max_len, &self.budget)?;
        let c_pi = plain_complexity(&pi, &empty, &limits, self.max_len, &self.budget)?;
        let c_pair = plain_complexity(&input.encoded, &empty, &limits, self.max_len, &self.budget)?;
        let Some(c_pi_v) = c_pi.finite() else {
            return Err(Error::GuardExceeded { requested: self.max_len + 1, guard: self.max_len });
        };
        let log_n = (n as f64).log2();
        let y_test = match ci.finite() {
            Some(v) => v as f64 <= c_pi_v as f64 + self.params.c * log_n + self.c_vm as f64,
            None => false,
        };
        let n_threshold = c_pi_v as f64 + self.params.e * log_n - self.c_vm as f64;
        let n_test = match c_pair.finite() {
            Some(v) => v as f64 >= n_threshold,
            // Beyond the search bound, so at least `max_len + 1`.
            None => (self.max_len + 1) as f64 >= n_threshold,
        };
        let verdict = if y_test { Verdict::OutsideN } else { Verdict::OutsideY };
        Ok(ReferenceDecision { n, t_steps: limits.max_steps, ci, c_pi, c_pair, y_test, n_test, verdict })
    }
}

impl Decider for ReferenceDecider {
    fn name(&self) -> String {
        "reference".into()
    }

    fn decide(&self, input: &PairCode, _seed: u64) -> Result<Verdict> {
        self.evaluate(input).map(|d| d.verdict)
    }

    fn good_length(&self, n: usize) -> bool {
        n <= self.max_input
    }
}

/// External decider: one process per query, fed `{"input": bits, "seed": s}`
/// on a line and answering `{"verdict": "outside_y" | "outside_n"}`.
#[derive(Clone, Debug)]
pub struct SubprocessDecider {
    pub program: String,
    pub args: Vec<String>,
}

#[derive(Serialize)]
struct PluginQuery<'a> {
    input: &'a crate::bitcore::BitString,
    seed: u64,
}

#[derive(Deserialize)]
struct PluginReply {
    verdict: Verdict,
}

impl SubprocessDecider {
    pub fn new(program: impl Into<String>, args: Vec<String>) -> Self {
        Self { program: program.into(), args }
    }
}

impl Decider for SubprocessDecider {
    fn name(&self) -> String {
        format!("subprocess:{}", self.program)
    }

    fn decide(&self, input: &PairCode, seed: u64) -> Result<Verdict> {
        let io = |e: std::io::Error| Error::Malformed(format!("decider plugin {}: {e}", self.program));
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(io)?;
        let query = serde_json::to_string(&PluginQuery { input: &input.encoded, seed }).expect("query serializes");
        {
            let mut stdin = child.stdin.take().expect("piped stdin");
            writeln!(stdin, "{query}").map_err(io)?;
        }
        let mut line = String::new();
        BufReader::new(child.stdout.take().expect("piped stdout"))
            .read_line(&mut line)
            .map_err(io)?;
        child.wait().map_err(io)?;
        let reply: PluginReply = serde_json::from_str(line.trim())
            .map_err(|e| Error::Malformed(format!("decider plugin reply {:?}: {e}", line.trim())))?;
        Ok(reply.verdict)
    }
}
