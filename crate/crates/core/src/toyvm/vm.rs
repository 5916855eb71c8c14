//! The fixed toy machine.
//!
//! Programs are read as consecutive 3-bit opcodes (most significant bit
//! first); a trailing group of fewer than three bits is ignored. Execution
//! stops when the program counter runs past the last complete opcode.
//!
//! | bits | op     | effect                                                   |
//! |------|--------|----------------------------------------------------------|
//! | 000  | HALT   | stop                                                     |
//! | 001  | SEND0  | send bit 0 to the partner (no-op when running alone)     |
//! | 010  | SEND1  | send bit 1 to the partner (no-op when running alone)     |
//! | 011  | RECV   | read the next partner bit; skip the next op if it is 0   |
//! | 100  | OUT0   | append 0 to the private output                           |
//! | 101  | OUT1   | append 1 to the private output                           |
//! | 110  | READ   | append the next condition bit to the output; stop at end |
//! | 111  | JMP    | move back 4 ops, saturating at op 0                      |
//!
//! Every executed op, including the implicit stop past the end, costs one
//! step. A RECV with no unread partner bit reads 0.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::bitcore::BitString;

pub const JUMP_BACK: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    Halt,
    Send(bool),
    Recv,
    Out(bool),
    ReadCond,
    JumpBack,
}

impl Op {
    pub const ALL: [Op; 8] = [
        Op::Halt,
        Op::Send(false),
        Op::Send(true),
        Op::Recv,
        Op::Out(false),
        Op::Out(true),
        Op::ReadCond,
        Op::JumpBack,
    ];

    pub fn from_code(code: u8) -> Op {
        Op::ALL[(code & 7) as usize]
    }

    pub fn code(self) -> u8 {
        match self {
            Op::Halt => 0,
            Op::Send(false) => 1,
            Op::Send(true) => 2,
            Op::Recv => 3,
            Op::Out(false) => 4,
            Op::Out(true) => 5,
            Op::ReadCond => 6,
            Op::JumpBack => 7,
        }
    }
}

/// Raw program bits; every bit string is an acceptable program.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ToyProgram {
    pub code: BitString,
}

impl ToyProgram {
    pub fn new(code: BitString) -> Self {
        Self { code }
    }

    pub fn from_ops(ops: &[Op]) -> Self {
        let mut code = BitString::new();
        for op in ops {
            code.extend_from(&BitString::from_u64(op.code() as u64, 3));
        }
        Self { code }
    }

    pub fn ops(&self) -> Vec<Op> {
        self.code
            .bits()
            .chunks_exact(3)
            .map(|c| Op::from_code(((c[0] as u8) << 2) | ((c[1] as u8) << 1) | c[2] as u8))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.code.len()
    }

    pub fn is_empty(&self) -> bool {
        self.code.is_empty()
    }

    pub fn halt() -> Self {
        Self::from_ops(&[Op::Halt])
    }

    /// Copies the condition tape to the output.
    pub fn echo_condition() -> Self {
        Self::from_ops(&[Op::ReadCond, Op::JumpBack])
    }

    pub fn send_one() -> Self {
        Self::from_ops(&[Op::Send(true)])
    }
}

/// Resource limits for one side of a run. `max_steps` is the time bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VmLimits {
    pub max_steps: u64,
    pub max_output: usize,
    pub max_transcript: usize,
}

impl VmLimits {
    pub fn new(max_steps: u64, max_output: usize, max_transcript: usize) -> Self {
        Self { max_steps, max_output, max_transcript }
    }

    /// Limits with generous output and transcript caps.
    pub fn steps(max_steps: u64) -> Self {
        Self::new(max_steps, 4096, 8192)
    }

    pub fn is_valid(&self) -> bool {
        self.max_steps > 0 && self.max_output > 0 && self.max_transcript > 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SingleResult {
    Halted { output: BitString, steps: u64 },
    Timeout,
}

impl SingleResult {
    pub fn output(&self) -> Option<&BitString> {
        match self {
            SingleResult::Halted { output, .. } => Some(output),
            SingleResult::Timeout => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionOutcome {
    pub transcript: BitString,
    pub out_a: BitString,
    pub out_b: BitString,
    pub steps_a: u64,
    pub steps_b: u64,
    pub halted_a: bool,
    pub halted_b: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Event {
    Sent(bool),
    Halted,
    /// Step, output or transcript budget exhausted.
    Aborted,
    /// Execution reached the end of an open (still growing) program.
    NeedCode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum State {
    Running,
    Halted,
    Aborted,
}

/// A resumable machine over a decoded op sequence.
///
/// When `open` is set, running past the end yields [`Event::NeedCode`]
/// instead of halting; the complexity search uses this to grow programs.
#[derive(Clone, Debug)]
pub struct Machine<'a> {
    ops: Cow<'a, [Op]>,
    open: bool,
    interactive: bool,
    pc: usize,
    steps: u64,
    read_pos: usize,
    cond_pos: usize,
    output: BitString,
    state: State,
}

impl Machine<'static> {
    /// A closed machine that owns its program.
    pub fn owned(ops: Vec<Op>, interactive: bool) -> Self {
        Self::from_cow(Cow::Owned(ops), false, interactive)
    }
}

impl<'a> Machine<'a> {
    pub fn new(ops: &'a [Op], open: bool, interactive: bool) -> Self {
        Self::from_cow(Cow::Borrowed(ops), open, interactive)
    }

    fn from_cow(ops: Cow<'a, [Op]>, open: bool, interactive: bool) -> Self {
        Self {
            ops,
            open,
            interactive,
            pc: 0,
            steps: 0,
            read_pos: 0,
            cond_pos: 0,
            output: BitString::new(),
            state: State::Running,
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn pc(&self) -> usize {
        self.pc
    }

    pub fn output(&self) -> &BitString {
        &self.output
    }

    pub fn halted(&self) -> bool {
        self.state == State::Halted
    }

    pub fn is_done(&self) -> bool {
        self.state != State::Running
    }

    pub fn abort(&mut self) {
        self.state = State::Aborted;
    }

    /// Runs until the machine sends a bit, stops, or needs more code.
    /// `incoming` holds every bit the partner has sent so far.
    pub fn run(&mut self, incoming: &[bool], cond: &[bool], limits: &VmLimits) -> Event {
        loop {
            match self.state {
                State::Halted => return Event::Halted,
                State::Aborted => return Event::Aborted,
                State::Running => {}
            }
            if self.steps >= limits.max_steps {
                self.state = State::Aborted;
                return Event::Aborted;
            }
            let Some(&op) = self.ops.get(self.pc) else {
                if self.open {
                    return Event::NeedCode;
                }
                self.steps += 1;
                self.state = State::Halted;
                return Event::Halted;
            };
            self.steps += 1;
            self.pc += 1;
            match op {
                Op::Halt => {
                    self.state = State::Halted;
                    return Event::Halted;
                }
                Op::Send(b) => {
                    if self.interactive {
                        return Event::Sent(b);
                    }
                }
                Op::Recv => {
                    let bit = match incoming.get(self.read_pos) {
                        Some(&b) => {
                            self.read_pos += 1;
                            b
                        }
                        None => false,
                    };
                    if !bit {
                        self.pc += 1;
                    }
                }
                Op::Out(b) => {
                    if self.output.len() >= limits.max_output {
                        self.state = State::Aborted;
                        return Event::Aborted;
                    }
                    self.output.push(b);
                }
                Op::ReadCond => match cond.get(self.cond_pos) {
                    Some(&b) => {
                        if self.output.len() >= limits.max_output {
                            self.state = State::Aborted;
                            return Event::Aborted;
                        }
                        self.cond_pos += 1;
                        self.output.push(b);
                    }
                    None => {
                        self.state = State::Halted;
                        return Event::Halted;
                    }
                },
                Op::JumpBack => {
                    // pc already points past the jump.
                    self.pc = (self.pc - 1).saturating_sub(JUMP_BACK);
                }
            }
        }
    }
}

/// Deterministic output of `program` on `condition`.
pub fn run_single(program: &ToyProgram, condition: &BitString, limits: &VmLimits) -> SingleResult {
    let ops = program.ops();
    run_single_ops(&ops, condition, limits)
}

pub(crate) fn run_single_ops(ops: &[Op], condition: &BitString, limits: &VmLimits) -> SingleResult {
    let mut m = Machine::new(ops, false, false);
    match m.run(&[], condition.bits(), limits) {
        Event::Halted => SingleResult::Halted { output: m.output.clone(), steps: m.steps },
        _ => SingleResult::Timeout,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }

    fn idx(self) -> usize {
        match self {
            Side::A => 0,
            Side::B => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::A => "alice",
            Side::B => "bob",
        }
    }
}

/// Target used to cut a simulation short as soon as it can no longer
/// produce `(pi, x, x)`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Target<'t> {
    pub pi: &'t BitString,
    pub x: &'t BitString,
}

#[derive(Debug)]
pub(crate) enum SimResult {
    Complete(InteractionOutcome),
    NeedCode(Side),
    Pruned,
}

/// Lock-step alternating simulation. A sends first; while one machine
/// computes the other is idle. Once a side has stopped, each bit the other
/// side still sends is preceded by a 0 credited to the stopped side, so
/// even transcript positions (0-based) always belong to A.
pub(crate) fn simulate(
    ops: [&[Op]; 2],
    open: [bool; 2],
    limits: &VmLimits,
    target: Option<Target<'_>>,
) -> SimResult {
    let mut machines = [Machine::new(ops[0], open[0], true), Machine::new(ops[1], open[1], true)];
    let mut sent: [Vec<bool>; 2] = [Vec::new(), Vec::new()];
    let mut transcript = BitString::new();
    let mut turn = Side::A;

    let prefix_ok = |t: &BitString, m: &[Machine<'_>; 2]| match target {
        None => true,
        Some(tg) => {
            t.is_prefix_of(tg.pi)
                && m[0].output().is_prefix_of(tg.x)
                && m[1].output().is_prefix_of(tg.x)
        }
    };

    loop {
        let me = turn;
        let other = me.other();
        let (mi, oi) = (me.idx(), other.idx());
        if machines[mi].is_done() && machines[oi].is_done() {
            break;
        }
        if !machines[mi].is_done() {
            let ev = machines[mi].run(&sent[oi], &[], limits);
            match ev {
                Event::Sent(b) => {
                    if transcript.len() + 1 > limits.max_transcript {
                        machines[mi].abort();
                    } else {
                        transcript.push(b);
                        sent[mi].push(b);
                        turn = other;
                    }
                }
                Event::Halted | Event::Aborted => {}
                Event::NeedCode => return SimResult::NeedCode(me),
            }
        } else {
            let ev = machines[oi].run(&sent[mi], &[], limits);
            match ev {
                Event::Sent(b) => {
                    if transcript.len() + 2 > limits.max_transcript {
                        machines[oi].abort();
                    } else {
                        transcript.push(false);
                        sent[mi].push(false);
                        transcript.push(b);
                        sent[oi].push(b);
                    }
                }
                Event::Halted | Event::Aborted => {}
                Event::NeedCode => return SimResult::NeedCode(other),
            }
        }
        if target.is_some() {
            if !prefix_ok(&transcript, &machines) {
                return SimResult::Pruned;
            }
            if machines.iter().any(|m| m.is_done() && !m.halted()) {
                return SimResult::Pruned;
            }
        }
    }

    SimResult::Complete(InteractionOutcome {
        transcript,
        out_a: machines[0].output().clone(),
        out_b: machines[1].output().clone(),
        steps_a: machines[0].steps(),
        steps_b: machines[1].steps(),
        halted_a: machines[0].halted(),
        halted_b: machines[1].halted(),
    })
}

/// Runs `prog_a` against `prog_b` with A sending first.
pub fn run_interactive(prog_a: &ToyProgram, prog_b: &ToyProgram, limits: &VmLimits) -> InteractionOutcome {
    let (a, b) = (prog_a.ops(), prog_b.ops());
    match simulate([&a, &b], [false, false], limits, None) {
        SimResult::Complete(out) => out,
        // Closed programs never ask for code and no target means no pruning.
        SimResult::NeedCode(_) | SimResult::Pruned => unreachable!("closed run without target"),
    }
}
