use kcagree::bitcore::{bits, encode_pair, pair_len, BitString};
use kcagree::hashing::{MatrixFamily, MatrixHash};
use kcagree::protocols::{check_dh_like, execute, ToyDh};
use kcagree::reductions::decider::{ReferenceDecider, MEASURED_C_VM};
use kcagree::reductions::embed::{embedding_len, header_field_bits, serialize_hash};
use kcagree::reductions::leakage::leakage_experiment_with_stream;
use kcagree::reductions::{
    breaker_e, embed_transcript, leakage_experiment, parse_embedding, reference_decider, sample_breaker, BreakerConfig,
    ConstDecider, Decider, FnDecider, Majority, Parity, PromiseParams, SubprocessDecider, ToyDhKeyDecider, Verdict,
};
use kcagree::seed::{rng_from, streams};
use kcagree::stats::chi_square_uniform;
use kcagree::toyvm::{run_interactive, run_single, ComplexityValue, Op, TimePreset, ToyProgram, VmLimits};
use kcagree::Error;
use rand::Rng;

fn params() -> PromiseParams {
    PromiseParams::new(1.0, 5.0, TimePreset::N2).unwrap()
}

#[test]
fn promise_params_validate() {
    assert!(PromiseParams::new(0.0, 1.0, TimePreset::N2).is_err());
    assert!(PromiseParams::new(2.0, 2.0, TimePreset::N2).is_err());
    let narrow = PromiseParams::new(1.0, 2.0, TimePreset::N2).unwrap();
    assert_eq!(narrow.regime(), "narrow");
    assert_eq!(narrow.warnings().len(), 1);
    assert_eq!(params().regime(), "gap");
}

#[test]
fn majority_amplifies() {
    // Wrong in 30% of calls, chosen by the seed.
    let noisy = FnDecider::new("noisy", |_: &kcagree::PairCode, s: u64| {
        Ok(if rng_from(s).gen_bool(0.3) { Verdict::OutsideY } else { Verdict::OutsideN })
    });
    assert!(Majority::new(&noisy, 4).is_err());
    let maj = Majority::new(&noisy, 5).unwrap();
    let input = encode_pair(&bits("01"), &bits("1"));
    let wrong = (0..4000u64).filter(|&s| maj.decide(&input, s).unwrap() == Verdict::OutsideY).count();
    // P[Bin(5, 0.3) >= 3] = 0.16308
    let rate = wrong as f64 / 4000.0;
    assert!((rate - 0.16308).abs() < 0.02, "{rate}");
    struct Declared;
    impl Decider for Declared {
        fn name(&self) -> String {
            "declared".into()
        }
        fn decide(&self, _: &kcagree::PairCode, _: u64) -> kcagree::Result<Verdict> {
            Ok(Verdict::OutsideN)
        }
        fn failure_probability(&self) -> f64 {
            0.3
        }
    }
    let p = Majority::new(Declared, 5).unwrap().failure_probability();
    assert!((p - 0.16308).abs() < 1e-9, "{p}");
}

fn brute_plain(x: &BitString, limits: &VmLimits, max_len: usize) -> ComplexityValue {
    for p in BitString::all_up_to(max_len) {
        if run_single(&ToyProgram::new(p.clone()), &BitString::new(), limits).output() == Some(x) {
            return ComplexityValue::Finite(p.len());
        }
    }
    ComplexityValue::Infinite
}

fn brute_interactive(pi: &BitString, x: &BitString, limits: &VmLimits, max_len: usize) -> ComplexityValue {
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

fn small_reference() -> ReferenceDecider {
    let mut d = reference_decider(params());
    d.max_len = 12;
    d
}

/// Y-test from raw enumeration of programs.
#[test]
fn reference_decider_matches_enumeration() {
    let d = small_reference();
    for n in 1..=6 {
        for p in 0..=(n - 1) / 2 {
            for pi in BitString::all_of_len(p) {
                for x in BitString::all_of_len(n - pair_len(p, 0)) {
                    let input = encode_pair(&pi, &x);
                    let limits = TimePreset::N2.limits(n);
                    let ci = brute_interactive(&pi, &x, &limits, 12);
                    let cp = brute_plain(&pi, &limits, 12).finite().unwrap();
                    let bound = cp as f64 + (n as f64).log2() + MEASURED_C_VM as f64;
                    let want = match ci.finite() {
                        Some(v) if v as f64 <= bound => Verdict::OutsideN,
                        _ => Verdict::OutsideY,
                    };
                    let got = d.evaluate(&input).unwrap();
                    assert_eq!(got.ci, ci, "{pi} {x}");
                    assert_eq!(got.verdict, want, "{pi} {x}");
                    // Deterministic.
                    assert_eq!(d.decide(&input, 1).unwrap(), d.decide(&input, 2).unwrap());
                }
            }
        }
    }
}

#[test]
fn reference_decider_examples() {
    let d = reference_decider(params());
    // A short program pair: Alice sends 1 and both print it.
    let a = ToyProgram::from_ops(&[Op::Send(true), Op::Out(true), Op::Halt]);
    let b = ToyProgram::from_ops(&[Op::Recv, Op::Out(true), Op::Halt]);
    let o = run_interactive(&a, &b, &TimePreset::N2.limits(4));
    assert!(o.halted_a && o.halted_b && o.out_a == o.out_b);
    let input = encode_pair(&o.transcript, &o.out_a);
    assert!(input.len() <= 6);
    assert_eq!(d.decide(&input, 0).unwrap(), Verdict::OutsideN);
    // Among 4-bit keys with empty transcript, one of largest complexity.
    let worst = BitString::all_of_len(4)
        .map(|x| (d.evaluate(&encode_pair(&bits(""), &x)).unwrap().ci, x))
        .max_by(|a, b| a.0.cmp(&b.0))
        .unwrap();
    let rep = d.evaluate(&encode_pair(&bits(""), &worst.1)).unwrap();
    assert_eq!(rep.verdict, Verdict::OutsideY, "{rep:?}");
    assert!(matches!(d.decide(&encode_pair(&bits("000"), &bits("1")), 0), Err(Error::DomainTooLarge(_))));
}

#[test]
fn subprocess_plugin() {
    let yes = SubprocessDecider::new(
        "sh",
        vec!["-c".into(), r#"read line; case "$line" in *'"input":"1'*) echo '{"verdict":"outside_n"}';; *) echo '{"verdict":"outside_y"}';; esac"#.into()],
    );
    assert_eq!(yes.decide(&encode_pair(&bits(""), &bits("0")), 3).unwrap(), Verdict::OutsideN);
    assert_eq!(yes.decide(&encode_pair(&bits("1"), &bits("")), 3).unwrap(), Verdict::OutsideY);
    let bad = SubprocessDecider::new("sh", vec!["-c".into(), "read line; echo nonsense".into()]);
    assert!(matches!(bad.decide(&encode_pair(&bits(""), &bits("")), 0), Err(Error::Malformed(_))));
}

#[test]
fn embedding_examples() {
    let pi = bits("0110");
    let empty = MatrixHash::zero(0, 3);
    let t = embed_transcript(&pi, &empty, &empty, &bits(""), &bits("")).unwrap();
    // Two 2-bit headers "11" "00" per hash, interleaved.
    assert_eq!(t, bits("0110").concat(&bits("10100000")).concat(&bits("01010000")));
    let one = MatrixHash::from_rows(vec![1], 1).unwrap();
    let none = MatrixHash::zero(0, 1);
    let t = embed_transcript(&bits(""), &one, &none, &bits("0"), &bits("")).unwrap();
    assert_eq!(t.truncated(6), bits("101010"));
    assert!(matches!(
        embed_transcript(&pi, &one, &none, &bits(""), &bits("")),
        Err(Error::LengthMismatch { expected: 1, got: 0 })
    ));
    assert!(embed_transcript(&pi, &one, &none, &bits("1"), &bits("1")).is_err());
}

/// Length bookkeeping and round trip for every size with `rho <= 3`, over
/// the whole family for `rho <= 2`.
#[test]
fn embedding_length_is_exact() {
    let mut rng = rng_from(5);
    for rho in 0..=3usize {
        for kh in 0..=rho {
            for kg in 0..=rho {
                let hs: Vec<MatrixHash> = if rho <= 2 {
                    MatrixFamily::new(rho, kh).members().collect()
                } else {
                    (0..8).map(|_| MatrixHash::random(kh, rho, &mut rng)).collect()
                };
                for h in hs {
                    let g = MatrixHash::random(kg, rho, &mut rng);
                    for w in BitString::all_of_len(kh) {
                        let v = kcagree::protocols::random_bits(kg, &mut rng);
                        let pi = kcagree::protocols::random_bits(rng.gen_range(0..5), &mut rng);
                        let t = embed_transcript(&pi, &h, &g, &w, &v).unwrap();
                        let hdr = 2 * header_field_bits(rho);
                        assert_eq!(serialize_hash(&h).len(), hdr + rho * kh);
                        let added = 2 * (hdr + rho * kh + hdr + rho * kg + kh + kg);
                        assert_eq!(t.len(), pi.len() + added);
                        assert_eq!(embedding_len(rho, kh, rho, kg), added);
                        let e = parse_embedding(&t, pi.len(), rho).unwrap();
                        assert_eq!((e.pi, e.h, e.g, e.w, e.v), (pi, h.clone(), g.clone(), w, v));
                        assert!(e.rest.is_empty());
                    }
                }
            }
        }
    }
}

#[test]
fn breaker_with_constant_decider() {
    let cfg = BreakerConfig::new(0.1, Parity::Even).unwrap();
    let (pi, z) = (BitString::zeros(40), bits("1011"));
    for s in 0..50 {
        assert!(breaker_e(&ConstDecider(Verdict::OutsideN), &pi, &z, &cfg, s).unwrap());
        assert!(!breaker_e(&ConstDecider(Verdict::OutsideY), &pi, &z, &cfg, s).unwrap());
    }
    let n = pair_len(40, 4);
    let odd = BreakerConfig::new(0.1, Parity::Odd).unwrap();
    let mut rng = rng_from(1);
    assert_eq!(sample_breaker(&pi, &z, &cfg, &mut rng).unwrap().input.len(), 2 * n);
    assert_eq!(sample_breaker(&pi, &z, &odd, &mut rng).unwrap().input.len(), 2 * n + 1);
    let short = sample_breaker(&bits("01"), &bits("1"), &cfg, &mut rng);
    assert!(matches!(short, Err(Error::EmbeddingTooLong { target: 12, .. })), "{short:?}");
    assert!(BreakerConfig::new(0.0, Parity::Even).is_err());
    assert!(!cfg.warnings(Some(&params()), Some(1.0)).is_empty());
}

/// Sampled sizes, matrix entries and hash values are uniform.
#[test]
fn breaker_sampling_is_uniform() {
    let cfg = BreakerConfig::new(0.25, Parity::Even).unwrap();
    let (pi, z) = (BitString::zeros(60), BitString::zeros(9));
    let n = pair_len(60, 9);
    assert_eq!(cfg.rho(n), 3);
    let mut alpha = [0u64; 3];
    let mut beta = [0u64; 3];
    let mut entries = [0u64; 2];
    let mut w_first = [0u64; 2];
    let mut rng = rng_from(streams::BREAKER);
    for _ in 0..10_000 {
        let s = sample_breaker(&pi, &z, &cfg, &mut rng).unwrap();
        alpha[s.alpha - 1] += 1;
        beta[s.beta - 1] += 1;
        for &b in s.h.to_bits().bits().iter().chain(s.g.to_bits().bits()) {
            entries[b as usize] += 1;
        }
        w_first[s.w.get(0).unwrap() as usize] += 1;
    }
    for counts in [&alpha[..], &beta[..], &entries[..], &w_first[..]] {
        let (_, p) = chi_square_uniform(counts);
        assert!(p > 1e-3, "{counts:?} p = {p}");
    }
}

#[test]
fn leakage_of_ignoring_breaker_is_zero() {
    let cfg = BreakerConfig::new(0.1, Parity::Even).unwrap();
    let r = leakage_experiment(&ToyDh, &ConstDecider(Verdict::OutsideN), &cfg, 40, 300, 2).unwrap();
    assert_eq!(r.estimates.gap, 0.0);
    assert!(r.ci.gap.0 <= 0.0 && 0.0 <= r.ci.gap.1);
    assert!(!r.gap_positive());
}

#[test]
fn toydh_leaks_to_the_key_decider() {
    assert!(check_dh_like(&ToyDh, 40).unwrap().is_bijective());
    for (n, eps) in [(40, 0.1), (90, 0.2)] {
        let cfg = BreakerConfig::new(eps, Parity::Even).unwrap();
        let r = leakage_experiment(&ToyDh, &ToyDhKeyDecider, &cfg, n, 2000, 7).unwrap();
        assert_eq!(r.estimates.p_real, 1.0);
        assert!(r.gap_positive(), "{r:?}");
        let json = serde_json::to_value(&r).unwrap();
        for key in ["experiment", "params", "trials", "estimates", "ci", "seed"] {
            assert!(json.get(key).is_some());
        }
    }
}

/// Relabeling the stream of `U` changes only sampling noise.
#[test]
fn leakage_does_not_depend_on_the_uniform_stream() {
    let cfg = BreakerConfig::new(0.1, Parity::Even).unwrap();
    let n = 34; // one key bit
    let a = leakage_experiment_with_stream(&ToyDh, &ToyDhKeyDecider, &cfg, n, 4000, 11, streams::UNIFORM).unwrap();
    let b = leakage_experiment_with_stream(&ToyDh, &ToyDhKeyDecider, &cfg, n, 4000, 11, 99).unwrap();
    assert_eq!(a.hits_real, b.hits_real);
    assert!(a.ci.p_uniform.0 <= b.ci.p_uniform.1 && b.ci.p_uniform.0 <= a.ci.p_uniform.1);
    assert!((a.estimates.gap - 0.5).abs() < 0.05 && (b.estimates.gap - 0.5).abs() < 0.05);
}

#[test]
fn reference_decider_cannot_reach_toydh() {
    let cfg = BreakerConfig::new(0.1, Parity::Even).unwrap();
    let run = execute(&ToyDh, 40, 0).unwrap();
    let err = breaker_e(&reference_decider(params()), &run.outcome.transcript, &run.outcome.x, &cfg, 0).unwrap_err();
    assert!(err.is_budget(), "{err}");
}
