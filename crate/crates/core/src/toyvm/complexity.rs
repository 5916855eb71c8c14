//! Exact time-bounded plain and interactive complexity on the toy machine.
//!
//! Both searches grow programs one opcode at a time and simulate each
//! prefix with an *open* end. A prefix whose run finishes (or fails)
//! without touching its end behaves like every extension of it, so the
//! whole subtree collapses to one candidate. Runs that disagree with the
//! target transcript or output are cut immediately, and a running best
//! bounds the depth. Minimal programs never carry a partial trailing
//! opcode, so all finite values are multiples of three.

use std::cmp::Ordering;
use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::vm::{simulate, Event, Machine, Op, SimResult, Side, Target, VmLimits};
use crate::bitcore::BitString;
use crate::error::{Error, Result};

/// Bits per opcode.
pub const OP_BITS: usize = 3;

/// Complexity in bits, or `Infinite` when nothing within the search bound
/// produces the target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ComplexityValue {
    Finite(usize),
    Infinite,
}

impl ComplexityValue {
    pub fn finite(self) -> Option<usize> {
        match self {
            ComplexityValue::Finite(v) => Some(v),
            ComplexityValue::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ComplexityValue::Finite(_))
    }
}

impl Ord for ComplexityValue {
    fn cmp(&self, other: &Self) -> Ordering {
        use ComplexityValue::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.cmp(b),
            (Finite(_), Infinite) => Ordering::Less,
            (Infinite, Finite(_)) => Ordering::Greater,
            (Infinite, Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for ComplexityValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ComplexityValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComplexityValue::Finite(v) => write!(f, "{v}"),
            ComplexityValue::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for ComplexityValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.finite().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexityValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match Option::<usize>::deserialize(d)? {
            Some(v) => ComplexityValue::Finite(v),
            None => ComplexityValue::Infinite,
        })
    }
}

pub const DEFAULT_PLAIN_GUARD: usize = 20;
pub const DEFAULT_PAIR_GUARD: usize = 18;

/// Desk-scale guards and an optional wall-time budget.
#[derive(Clone, Copy, Debug)]
pub struct SearchBudget {
    pub plain_guard: usize,
    pub pair_guard: usize,
    pub wall: Option<Duration>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            plain_guard: DEFAULT_PLAIN_GUARD,
            pair_guard: DEFAULT_PAIR_GUARD,
            wall: None,
        }
    }
}

impl SearchBudget {
    pub fn with_guards(plain_guard: usize, pair_guard: usize) -> Self {
        Self { plain_guard, pair_guard, ..Self::default() }
    }

    pub fn with_wall(mut self, wall: Option<Duration>) -> Self {
        self.wall = wall;
        self
    }
}

struct Clock {
    start: Instant,
    wall: Option<Duration>,
    ticks: u32,
}

impl Clock {
    fn new(wall: Option<Duration>) -> Self {
        Self { start: Instant::now(), wall, ticks: 0 }
    }

    fn check(&mut self) -> Result<()> {
        self.ticks = self.ticks.wrapping_add(1);
        if let Some(w) = self.wall {
            if self.ticks.is_multiple_of(1024) && self.start.elapsed() > w {
                return Err(Error::BudgetExceeded { budget_ms: w.as_millis() as u64 });
            }
        }
        Ok(())
    }
}

/// `min |p|` over programs with `|p| <= max_prog_len` whose halting output
/// on `condition` is `x`.
pub fn plain_complexity(
    x: &BitString,
    condition: &BitString,
    limits: &VmLimits,
    max_prog_len: usize,
    budget: &SearchBudget,
) -> Result<ComplexityValue> {
    if max_prog_len > budget.plain_guard {
        return Err(Error::GuardExceeded { requested: max_prog_len, guard: budget.plain_guard });
    }
    let mut search = PlainSearch {
        x,
        cond: condition,
        limits,
        max_ops: max_prog_len / OP_BITS,
        best: None,
        clock: Clock::new(budget.wall),
    };
    let mut ops = Vec::new();
    search.dfs(&mut ops)?;
    Ok(match search.best {
        Some(n) => ComplexityValue::Finite(n * OP_BITS),
        None => ComplexityValue::Infinite,
    })
}

struct PlainSearch<'s> {
    x: &'s BitString,
    cond: &'s BitString,
    limits: &'s VmLimits,
    max_ops: usize,
    best: Option<usize>,
    clock: Clock,
}

enum PlainRun {
    Hit,
    Miss,
    NeedCode,
}

impl PlainSearch<'_> {
    fn run(&self, ops: &[Op], open: bool) -> PlainRun {
        let mut m = Machine::new(ops, open, false);
        // Single-mode runs only stop on halt, abort or missing code.
        let ev = m.run(&[], self.cond.bits(), self.limits);
        if !m.output().is_prefix_of(self.x) {
            return PlainRun::Miss;
        }
        match ev {
            Event::Halted if m.output() == self.x => PlainRun::Hit,
            Event::NeedCode => PlainRun::NeedCode,
            _ => PlainRun::Miss,
        }
    }

    fn bound(&self) -> usize {
        match self.best {
            Some(b) => b.saturating_sub(1).min(self.max_ops),
            None => self.max_ops,
        }
    }

    fn record(&mut self, len: usize) {
        if self.best.is_none_or(|b| len < b) {
            self.best = Some(len);
        }
    }

    fn dfs(&mut self, ops: &mut Vec<Op>) -> Result<()> {
        self.clock.check()?;
        match self.run(ops, true) {
            PlainRun::Hit => self.record(ops.len()),
            PlainRun::Miss => {}
            PlainRun::NeedCode => {
                if let PlainRun::Hit = self.run(ops, false) {
                    self.record(ops.len());
                }
                if ops.len() < self.bound() {
                    for op in Op::ALL {
                        ops.push(op);
                        self.dfs(ops)?;
                        ops.pop();
                        if ops.len() >= self.bound() {
                            break;
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// `min |ab|` over program pairs with `|ab| <= max_pair_len` whose
/// interaction has transcript `pi`, both outputs `x`, and both sides halting
/// within `limits.max_steps`.
pub fn interactive_complexity(
    pi: &BitString,
    x: &BitString,
    limits: &VmLimits,
    max_pair_len: usize,
    budget: &SearchBudget,
) -> Result<ComplexityValue> {
    if max_pair_len > budget.pair_guard {
        return Err(Error::GuardExceeded { requested: max_pair_len, guard: budget.pair_guard });
    }
    let mut search = PairSearch {
        target: Target { pi, x },
        limits,
        max_ops: max_pair_len / OP_BITS,
        best: None,
        clock: Clock::new(budget.wall),
    };
    let mut code = [Vec::new(), Vec::new()];
    search.dfs(&mut code, [true, true])?;
    Ok(match search.best {
        Some(n) => ComplexityValue::Finite(n * OP_BITS),
        None => ComplexityValue::Infinite,
    })
}

struct PairSearch<'s> {
    target: Target<'s>,
    limits: &'s VmLimits,
    max_ops: usize,
    best: Option<usize>,
    clock: Clock,
}

impl PairSearch<'_> {
    fn bound(&self) -> usize {
        match self.best {
            Some(b) => b.saturating_sub(1).min(self.max_ops),
            None => self.max_ops,
        }
    }

    fn is_hit(&self, r: &SimResult) -> bool {
        match r {
            SimResult::Complete(o) => {
                o.halted_a
                    && o.halted_b
                    && &o.transcript == self.target.pi
                    && &o.out_a == self.target.x
                    && &o.out_b == self.target.x
            }
            _ => false,
        }
    }

    fn dfs(&mut self, code: &mut [Vec<Op>; 2], open: [bool; 2]) -> Result<()> {
        self.clock.check()?;
        let total = code[0].len() + code[1].len();
        let r = simulate([&code[0], &code[1]], open, self.limits, Some(self.target));
        match r {
            SimResult::NeedCode(side) => {
                let i = match side {
                    Side::A => 0,
                    Side::B => 1,
                };
                let mut closed = open;
                closed[i] = false;
                self.dfs(code, closed)?;
                if total < self.bound() {
                    for op in Op::ALL {
                        code[i].push(op);
                        self.dfs(code, open)?;
                        code[i].pop();
                        if total >= self.bound() {
                            break;
                        }
                    }
                }
            }
            r => {
                if self.is_hit(&r) && self.best.is_none_or(|b| total < b) {
                    self.best = Some(total);
                }
            }
        }
        Ok(())
    }
}

/// Step budget as a function of `|pi x|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimePreset {
    /// `t(n) = n^2`
    N2,
    /// `t(n) = 8 n ceil(log2 n)`
    NLogN,
}

/// Floor applied to every preset so constant-size programs can halt.
pub const MIN_STEPS: u64 = 16;

impl TimePreset {
    pub fn steps(self, n: usize) -> u64 {
        let n = n as u64;
        let t = match self {
            TimePreset::N2 => n * n,
            TimePreset::NLogN => 8 * n * crate::bitcore::ceil_log2(n) as u64,
        };
        t.max(MIN_STEPS)
    }

    pub fn limits(self, n: usize) -> VmLimits {
        VmLimits::steps(self.steps(n))
    }

    pub fn name(self) -> &'static str {
        match self {
            TimePreset::N2 => "n2",
            TimePreset::NLogN => "nlogn",
        }
    }
}

impl std::str::FromStr for TimePreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n2" => Ok(TimePreset::N2),
            "nlogn" => Ok(TimePreset::NLogN),
            other => Err(Error::InvalidParameter(format!("unknown time preset {other:?}"))),
        }
    }
}
