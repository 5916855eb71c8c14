//! A fixed interactive machine pair and exact complexity by enumeration.

pub mod complexity;
pub mod golden;
pub mod vm;

pub use complexity::{
    interactive_complexity, plain_complexity, ComplexityValue, SearchBudget, TimePreset, OP_BITS,
};
pub use vm::{
    run_interactive, run_single, Event, InteractionOutcome, Machine, Op, Side, SingleResult, ToyProgram, VmLimits,
};
