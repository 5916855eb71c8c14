//! Brute-force oracles shared by integration tests.
#![allow(dead_code)]

use kcagree::bitcore::BitString;
use kcagree::toyvm::{run_interactive, run_single, ComplexityValue, ToyProgram, VmLimits};

pub fn brute_plain(x: &BitString, cond: &BitString, limits: &VmLimits, max_len: usize) -> ComplexityValue {
    for p in BitString::all_up_to(max_len) {
        if run_single(&ToyProgram::new(p.clone()), cond, limits).output() == Some(x) {
            return ComplexityValue::Finite(p.len());
        }
    }
    ComplexityValue::Infinite
}

/// Every split of every total length, shortest total first.
pub fn brute_interactive(pi: &BitString, x: &BitString, limits: &VmLimits, max_len: usize) -> ComplexityValue {
    for total in 0..=max_len {
        for la in 0..=total {
            for a in BitString::all_of_len(la) {
                for b in BitString::all_of_len(total - la) {
                    let o = run_interactive(&ToyProgram::new(a.clone()), &ToyProgram::new(b), limits);
                    if o.halted_a && o.halted_b && &o.transcript == pi && &o.out_a == x && &o.out_b == x {
                        return ComplexityValue::Finite(total);
                    }
                }
            }
        }
    }
    ComplexityValue::Infinite
}
