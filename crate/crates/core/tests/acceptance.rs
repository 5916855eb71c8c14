//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Exits nonzero when a criterion fails, except those listed in
//! `EXPECTED_RED`, which are printed as FAIL with their analysis.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{brute_interactive, brute_plain};
use kcagree::bitcore::{decode_pair, encode_pair, BitString};
use kcagree::hashing::lemma5::{exhaustive_adaptive, exhaustive_product, ExhaustiveSummary, SideProfile};
use kcagree::hashing::verify::{observations, universality};
use kcagree::hashing::{lemma5_montecarlo, ratio_string, CompatibleSets};
use kcagree::protocols::levin::hash_len;
use kcagree::protocols::{check_dh_like, estimate_agreement, DhVerdict, LevinSearch, ToyDh};
use kcagree::reductions::eve::measured_constant;
use kcagree::reductions::gl::DEFAULT_GUARD;
use kcagree::reductions::{
    count_s, gl_list_decode, leakage_experiment, reference_decider, BreakerConfig, NoisyOracle, Parity,
    PromiseParams, RandomEve, ToyDhKeyDecider,
};
use kcagree::seed::{derive, streams, trial_rng};
use kcagree::toyvm::golden::split_cost;
use kcagree::toyvm::{interactive_complexity, plain_complexity, ComplexityValue, SearchBudget, TimePreset, VmLimits};
use kcagree::Error;

/// Criteria that cannot be met at desk scale; see the README.
const EXPECTED_RED: &[u32] = &[8];

/// Step budget of the checked-in complexity tables.
const GOLDEN_STEPS: u64 = 32;

type Criterion<'a> = (u32, &'static str, Option<u64>, Box<dyn Fn() -> Verdict + 'a>);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn pair_law() -> Verdict {
    let mut pairs = 0;
    let mut bad = 0;
    for pi in BitString::all_up_to(4) {
        for x in BitString::all_up_to(4) {
            pairs += 1;
            let code = encode_pair(&pi, &x);
            let ok = code.len() == 2 * pi.len() + 1 + x.len()
                && decode_pair(&code.encoded).ok() == Some((pi.clone(), x.clone()));
            bad += !ok as u32;
        }
    }
    verdict(bad == 0, format!("{pairs} pairs, {bad} violations"))
}

/// Row `j` of matrix `m` of the `k x rho` family, rows packed low first.
fn row(m: u64, j: usize, rho: usize) -> u64 {
    (m >> (j * rho)) & ((1 << rho) - 1)
}

fn image(m: u64, k: usize, rho: usize, a: u64) -> u64 {
    (0..k).fold(0, |acc, j| (acc << 1) | ((row(m, j, rho) & a).count_ones() as u64 & 1))
}

fn hash_universality() -> Verdict {
    let mut cases = 0;
    let mut bad = Vec::new();
    for rho in 1..=4usize {
        for k in 1..=3usize {
            cases += 1;
            let lib = universality(rho, k).map(|r| r.mismatches == 0).unwrap_or(false);
            let total = 1u64 << (k * rho);
            let oracle = (0..1u64 << rho).all(|a| {
                (a + 1..1u64 << rho).all(|b| {
                    let hits = (0..total).filter(|&m| image(m, k, rho, a) == image(m, k, rho, b)).count() as u64;
                    hits << k == total
                })
            });
            if !(lib && oracle) {
                bad.push(format!("({rho},{k})"));
            }
        }
    }
    verdict(bad.is_empty(), format!("{cases} (rho, k) families, all pairs exactly 2^-k; failures: {bad:?}"))
}

fn reduced(num: u64, den: u64) -> String {
    let g = gcd(num, den);
    format!("{}/{}", num / g, den / g)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Smallest `support / (|H| |W|)` over `A` of `{0,1}^3` with `|A| >= 2^k`,
/// by direct enumeration.
fn support_oracle(k: usize) -> (u64, u64) {
    let rho = 3;
    let total = 1u64 << (k * rho);
    let mut best = (1, 1);
    for mask in 1u32..256 {
        let set: Vec<u64> = (0..8).filter(|a| mask >> a & 1 == 1).collect();
        if set.len() < 1 << k {
            continue;
        }
        let support: u64 = (0..total)
            .map(|m| {
                let mut img: Vec<u64> = set.iter().map(|&a| image(m, k, rho, a)).collect();
                img.sort_unstable();
                img.dedup();
                img.len() as u64
            })
            .sum();
        let cells = total << k;
        if support * best.1 < best.0 * cells {
            best = (support, cells);
        }
    }
    best
}

fn support_bound() -> Verdict {
    let mut lines = Vec::new();
    let mut pass = true;
    for k in 1..=2 {
        let r = match observations(3, k) {
            Ok(r) => r,
            Err(e) => return verdict(false, e.to_string()),
        };
        let (s, c) = support_oracle(k);
        let ok = r.support_failures == 0 && 2 * s >= c && r.min_support_fraction == reduced(s, c);
        pass &= ok;
        lines.push(format!("k={k}: {} sets, min support/(|H||W|) = {}", r.sets, r.min_support_fraction));
    }
    verdict(pass, lines.join("; "))
}

fn inverse_law() -> Verdict {
    let mut lines = Vec::new();
    let mut pass = true;
    for k in 1..=2 {
        let r = match observations(3, k) {
            Ok(r) => r,
            Err(e) => return verdict(false, e.to_string()),
        };
        // Defined exactly when w lies in h(A).
        let (s, c) = support_oracle(k);
        let ok = r.inverse_failures == 0 && r.nonuniform == 0 && r.min_defined_mass == reduced(s, c) && 2 * s >= c;
        pass &= ok;
        lines.push(format!(
            "k={k}: min defined mass {}, {} non-uniform conditionals",
            r.min_defined_mass, r.nonuniform
        ));
    }
    verdict(pass, lines.join("; "))
}

/// Smallest `support / cells` over every nonempty subset of `{0,1}^rho`.
fn min_side_fraction(rho: usize) -> (u64, u64) {
    let mut best = (1u64, 1u64);
    for mask in 1u64..1 << (1 << rho) {
        let set: Vec<u64> = (0..1u64 << rho).filter(|a| mask >> a & 1 == 1).collect();
        let p = SideProfile::compute(rho, &set);
        if p.support * best.1 < best.0 * p.cells() {
            best = (p.support, p.cells());
        }
    }
    best
}

fn lemma5_core() -> Verdict {
    let mut families = 0u64;
    let mut failures = 0u64;
    let mut worst_mass: Option<ExhaustiveSummary> = None;
    let mut worst_dist: Option<ExhaustiveSummary> = None;
    let mut skipped = Vec::new();
    for ra in 1..=3usize {
        for rb in 1..=3usize {
            let runs = [exhaustive_product(ra, rb), exhaustive_adaptive(ra, rb)];
            for run in runs {
                match run {
                    Ok(s) => {
                        families += s.families;
                        failures += s.failures;
                        if worst_mass.as_ref().is_none_or(|w| s.min_defined_mass < w.min_defined_mass) {
                            worst_mass = Some(s.clone());
                        }
                        if worst_dist.as_ref().is_none_or(|w| s.max_distance > w.max_distance) {
                            worst_dist = Some(s);
                        }
                    }
                    Err(Error::DomainTooLarge(msg)) => skipped.push(msg),
                    Err(e) => return verdict(false, e.to_string()),
                }
            }
        }
    }
    // Any rectangle family with sides of at most 3 bits has defined mass at
    // least the square of the smallest per-side fraction.
    let (s, c) = min_side_fraction(3);
    let (s2, c2) = min_side_fraction(2);
    let (s1, c1) = min_side_fraction(1);
    let side = [(s, c), (s2, c2), (s1, c1)].into_iter().fold((1u64, 1u64), |b, (s, c)| if s * b.1 < b.0 * c { (s, c) } else { b });
    let certified = 4 * side.0 * side.0 >= side.1 * side.1;
    let (wm, wd) = (worst_mass.unwrap(), worst_dist.unwrap());
    verdict(
        failures == 0 && certified,
        format!(
            "{families} product and one-round adaptive families over all rho_a, rho_b <= 3, {failures} failures; \
             min defined mass {} at ({},{}), max distance {} at ({},{}); \
             defined mass >= ({})^2 for every rectangle family with sides <= 3 bits; not enumerated: {}",
            ratio_string(&wm.min_defined_mass),
            wm.rho_a,
            wm.rho_b,
            ratio_string(&wd.max_distance),
            wd.rho_a,
            wd.rho_b,
            reduced(side.0, side.1),
            if skipped.is_empty() { "none".into() } else { skipped.join("; ") }
        ),
    )
}

fn finite_instances() -> Vec<(BitString, BitString, ComplexityValue)> {
    let limits = VmLimits::steps(GOLDEN_STEPS);
    let budget = SearchBudget::default();
    let mut out = Vec::new();
    for pi in BitString::all_up_to(3) {
        for x in BitString::all_up_to(3) {
            let v = interactive_complexity(&pi, &x, &limits, 10, &budget).expect("within guard");
            out.push((pi.clone(), x, v));
        }
    }
    out
}

fn oracle_equivalence(instances: &[(BitString, BitString, ComplexityValue)]) -> Verdict {
    let limits = VmLimits::steps(GOLDEN_STEPS);
    let budget = SearchBudget::default();
    let mut bad = Vec::new();
    for (pi, x, v) in instances {
        if *v != brute_interactive(pi, x, &limits, 10) {
            bad.push(format!("CI({pi},{x})"));
        }
    }
    let mut plain = 0;
    for x in BitString::all_up_to(3) {
        for cond in BitString::all_up_to(3) {
            plain += 1;
            let fast = plain_complexity(&x, &cond, &limits, 10, &budget).expect("within guard");
            if fast != brute_plain(&x, &cond, &limits, 10) {
                bad.push(format!("C({x}|{cond})"));
            }
        }
    }
    let finite = instances.iter().filter(|i| i.2.is_finite()).count();
    verdict(
        bad.is_empty(),
        format!(
            "{} interactive ({finite} finite) and {plain} plain instances at t = {GOLDEN_STEPS}, max length 10; mismatches: {bad:?}",
            instances.len()
        ),
    )
}

fn golden_c_vm() -> i64 {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/concat_constant.json");
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).expect("golden file")).unwrap();
    doc["c_vm"].as_i64().expect("c_vm")
}

fn concatenation_bound(instances: &[(BitString, BitString, ComplexityValue)]) -> Verdict {
    let c_vm = golden_c_vm();
    let limits = VmLimits::steps(GOLDEN_STEPS);
    let budget = SearchBudget::with_guards(33, 18);
    let mut checked = 0;
    let mut slack = i64::MAX;
    let mut bad = Vec::new();
    for (pi, x, v) in instances {
        let Some(ci) = v.finite() else { continue };
        checked += 1;
        let code = encode_pair(pi, x).encoded;
        let bound = (ci + split_cost(ci)) as i64 + c_vm;
        match plain_complexity(&code, &BitString::new(), &limits, 33, &budget) {
            Ok(ComplexityValue::Finite(c)) if (c as i64) <= bound => slack = slack.min(bound - c as i64),
            other => bad.push(format!("({pi},{x}): {other:?} vs {bound}")),
        }
    }
    verdict(
        bad.is_empty() && checked > 0,
        format!("{checked} finite instances, c_vm = {c_vm}, min slack {slack}; violations: {bad:?}"),
    )
}

fn breaker_gap() -> Verdict {
    let n = 34;
    let trials = 10_000;
    let bij = match check_dh_like(&ToyDh, n) {
        Ok(DhVerdict::Bijective { size, .. }) => format!("ToyDH bijective on {size} randomness pairs"),
        other => return verdict(false, format!("ToyDH not DH-like: {other:?}")),
    };
    let cfg = BreakerConfig::new(0.1, Parity::Even).unwrap();
    let params = PromiseParams::new(4.0, 8.0, TimePreset::N2).unwrap();
    let reference = reference_decider(params);
    let main = match leakage_experiment(&ToyDh, &reference, &cfg, n, trials, 7) {
        Ok(r) => format!("reference decider gap {:.4}", r.estimates.gap),
        Err(e) => format!("reference decider unavailable: {e}"),
    };
    let supplementary = leakage_experiment(&ToyDh, &ToyDhKeyDecider, &cfg, 40, trials, 7)
        .map(|r| format!("{:.4}, 95% interval [{:.4}, {:.4}]", r.estimates.gap, r.ci.gap.0, r.ci.gap.1))
        .unwrap_or_else(|e| e.to_string());
    verdict(
        false,
        format!(
            "{bij}; smallest ToyDH n is {n}, so decider inputs have >= {} bits against an exact limit of {}; {main}; \
             supplementary protocol-aware decider gap at n = 40: {supplementary}",
            2 * n,
            kcagree::reductions::decider::REFERENCE_MAX_INPUT
        ),
    )
}

fn levin_agreement() -> Verdict {
    let (n, c, trials) = (16, 1.0, 100_000u64);
    let spec = LevinSearch::new(c, TimePreset::N2).unwrap();
    let k = spec.layout(n).k;
    let expected_k = ((c + 5.0) * (n as f64).log2()).ceil() as usize;
    let analytic = k == expected_k
        && k == hash_len(c, n)
        && ratio_string(&spec.collision_probability(n)) == format!("1/{}", 1u64 << k)
        && (1..=4).all(|rho| (1..=3).all(|k| universality(rho, k).is_ok_and(|r| r.mismatches == 0)));
    let agree = match estimate_agreement(&spec, n, trials, 9) {
        Ok(a) => a,
        Err(e) => return verdict(false, e.to_string()),
    };
    let p = (-(k as f64)).exp2();
    let bound = p + 3.0 * (p * (1.0 - p) / trials as f64).sqrt();
    let freq = (trials - agree.successes) as f64 / trials as f64;
    verdict(
        analytic && freq <= bound,
        format!("k = {k}, collision 2^-{k} exact; disagreement {freq:.2e} over {trials} trials, bound {bound:.2e}"),
    )
}

fn gl_rate(p: f64, runs: u64, seed: u64) -> kcagree::Result<u64> {
    let n = 16;
    let mut hits = 0;
    for i in 0..runs {
        let x = kcagree::protocols::random_bits(n, &mut trial_rng(seed, streams::UNIFORM, i));
        let oracle = NoisyOracle { x: x.clone(), p };
        let alpha = (2.0 * p - 1.0).min(0.7);
        let d = gl_list_decode(&oracle, n, alpha, DEFAULT_GUARD, derive(seed, streams::GL, i))?;
        hits += d.list.contains(&x) as u64;
    }
    Ok(hits)
}

fn gl_decoding() -> Verdict {
    match (gl_rate(0.85, 200, 10), gl_rate(1.0, 200, 11)) {
        (Ok(noisy), Ok(perfect)) => verdict(
            noisy >= 180 && perfect == 200,
            format!("p = 0.85: {noisy}/200 listed; perfect predictor: {perfect}/200"),
        ),
        (Err(e), _) | (_, Err(e)) => verdict(false, e.to_string()),
    }
}

fn s_counting() -> Verdict {
    let eve = RandomEve { c: 1.0 };
    let budget = SearchBudget::default();
    let mut counts = Vec::new();
    for n in 2..=6 {
        for ell in 0..=10 {
            match count_s(n, ell, &eve, 1.0, TimePreset::N2, 3, 12, &budget) {
                Ok(s) => counts.push(s),
                Err(e) => return verdict(false, e.to_string()),
            }
        }
    }
    let k = measured_constant(&counts);
    // Each pair in a level is the output of a distinct program pair of
    // total length l, which splits in floor(l / 3) + 1 ways.
    let counting = counts.iter().all(|s| s.size as f64 <= ((s.ell / 3 + 1) as f64) * (s.ell as f64).exp2());
    let within = counts.iter().all(|s| s.size as f64 <= k * (s.ell as f64).exp2());
    let nonempty = counts.iter().filter(|s| s.size > 0).count();
    verdict(
        within && counting && k.is_finite(),
        format!("n 2..6, l 0..10: {nonempty} nonempty sets, measured K = {k:.4}, counting bound floor(l/3)+1 respected"),
    )
}

/// JSON of a fixed battery of seeded experiments.
fn battery() -> String {
    let cfg = BreakerConfig::new(0.1, Parity::Even).unwrap();
    let leak = leakage_experiment(&ToyDh, &ToyDhKeyDecider, &cfg, 40, 2000, 3).unwrap();
    let levin = LevinSearch::new(1.0, TimePreset::N2).unwrap();
    let agree = estimate_agreement(&levin, 16, 2000, 4).unwrap();
    let eve = RandomEve { c: 1.0 };
    let counts: Vec<_> = (0..=8)
        .map(|l| count_s(5, l, &eve, 1.0, TimePreset::N2, 3, 5, &SearchBudget::default()).unwrap())
        .collect();
    let oracle = NoisyOracle { x: "1011001110001111".parse().unwrap(), p: 0.8 };
    let gl = gl_list_decode(&oracle, 16, 0.6, DEFAULT_GUARD, 6).unwrap();
    let mc = lemma5_montecarlo(&CompatibleSets::trivial(3, 3), 5000, 8).unwrap();
    let exhaustive = format!("{:?}", exhaustive_product(2, 2).unwrap());
    serde_json::to_string(&serde_json::json!({
        "leakage": leak,
        "agreement": agree,
        "s_counts": counts,
        "gl": gl,
        "lemma5_mc": mc,
        "lemma5_exhaustive": exhaustive,
    }))
    .unwrap()
}

fn reproducibility() -> Verdict {
    let mut outputs = Vec::new();
    for threads in [1, 4, 1, 4] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        outputs.push(pool.install(battery));
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    verdict(same, format!("6 experiments, 2 runs each at 1 and 4 threads, {} bytes, identical: {same}", outputs[0].len()))
}

fn main() -> ExitCode {
    let instances = finite_instances();
    let criteria: Vec<Criterion> = vec![
        (1, "pair-encoding law", Some(1), Box::new(pair_law)),
        (2, "hash universality", Some(10), Box::new(hash_universality)),
        (3, "hash support bound", Some(60), Box::new(support_bound)),
        (4, "inverse hash law", None, Box::new(inverse_law)),
        (5, "two-hash distributional core", Some(120), Box::new(lemma5_core)),
        (6, "complexity oracle equivalence", Some(600), Box::new(|| oracle_equivalence(&instances))),
        (7, "concatenation bound", None, Box::new(|| concatenation_bound(&instances))),
        (8, "breaker gap with exact decider", Some(1800), Box::new(breaker_gap)),
        (9, "Levin-search agreement", Some(300), Box::new(levin_agreement)),
        (10, "list decoding", Some(120), Box::new(gl_decoding)),
        (11, "S_{n,l} counting", Some(600), Box::new(s_counting)),
        (12, "reproducibility", None, Box::new(reproducibility)),
    ];
    let mut unexpected = Vec::new();
    for (id, name, limit, run) in criteria {
        let start = Instant::now();
        let v = run();
        let elapsed = start.elapsed();
        let in_time = limit.is_none_or(|s| elapsed <= Duration::from_secs(s));
        let pass = v.pass && in_time;
        let time = match limit {
            Some(s) => format!("{:.2} s of {s} s", elapsed.as_secs_f64()),
            None => format!("{:.2} s", elapsed.as_secs_f64()),
        };
        println!("{} {id:>2} {name}: {} [{time}]", if pass { "PASS" } else { "FAIL" }, v.detail);
        if pass == EXPECTED_RED.contains(&id) {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
