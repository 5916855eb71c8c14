//! The pruned searches against plain enumeration of raw program bits.

mod common;

use common::{brute_interactive, brute_plain};
use kcagree::bitcore::{bits, BitString};
use kcagree::toyvm::{interactive_complexity, plain_complexity, ComplexityValue, SearchBudget, VmLimits};

#[test]
fn plain_matches_enumeration() {
    let limits = VmLimits::steps(24);
    let budget = SearchBudget::default();
    for x in BitString::all_up_to(3) {
        for cond in ["", "1", "01", "110"] {
            let cond = bits(cond);
            let fast = plain_complexity(&x, &cond, &limits, 12, &budget).unwrap();
            assert_eq!(fast, brute_plain(&x, &cond, &limits, 12), "x={x} cond={cond}");
        }
    }
}

#[test]
fn interactive_matches_enumeration() {
    let limits = VmLimits::steps(24);
    let budget = SearchBudget::default();
    for pi in BitString::all_up_to(3) {
        for x in BitString::all_up_to(2) {
            let fast = interactive_complexity(&pi, &x, &limits, 9, &budget).unwrap();
            assert_eq!(fast, brute_interactive(&pi, &x, &limits, 9), "pi={pi} x={x}");
        }
    }
}

#[test]
fn silent_pair_golden_value() {
    let v = interactive_complexity(&bits(""), &bits(""), &VmLimits::steps(16), 18, &SearchBudget::default());
    assert_eq!(v.unwrap(), ComplexityValue::Finite(0));
    assert_eq!(
        plain_complexity(&bits(""), &bits(""), &VmLimits::steps(16), 20, &SearchBudget::default()).unwrap(),
        ComplexityValue::Finite(0)
    );
}

/// Conditioning never costs more than a measured machine constant; here
/// literal programs ignore the condition, so the constant is 0.
#[test]
fn conditional_monotonicity_constant() {
    let limits = VmLimits::steps(32);
    let budget = SearchBudget::default();
    let mut c_vm = 0i64;
    for x in BitString::all_up_to(4) {
        let unconditional = plain_complexity(&x, &bits(""), &limits, 12, &budget).unwrap().finite().unwrap();
        for y in BitString::all_up_to(4) {
            let conditional = plain_complexity(&x, &y, &limits, 12, &budget).unwrap().finite().unwrap();
            c_vm = c_vm.max(conditional as i64 - unconditional as i64);
        }
    }
    assert_eq!(c_vm, 0);
}

#[test]
fn longer_time_bound_never_increases() {
    let budget = SearchBudget::default();
    for pi in BitString::all_up_to(2) {
        for x in BitString::all_up_to(2) {
            let mut prev = ComplexityValue::Infinite;
            for steps in [1, 2, 4, 8, 16] {
                let v = interactive_complexity(&pi, &x, &VmLimits::steps(steps), 12, &budget).unwrap();
                assert!(v <= prev, "pi={pi} x={x} steps={steps}");
                prev = v;
                let p = plain_complexity(&x, &pi, &VmLimits::steps(steps), 12, &budget).unwrap();
                let p2 = plain_complexity(&x, &pi, &VmLimits::steps(steps * 2), 12, &budget).unwrap();
                assert!(p2 <= p);
            }
        }
    }
}
