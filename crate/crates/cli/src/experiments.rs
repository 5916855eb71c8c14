//! Per-subcommand configuration and execution.

use std::time::Duration;

use clap::{Args, ValueEnum};
use kcagree::bitcore::BitString;
use kcagree::hashing::lemma5::{exhaustive_adaptive, exhaustive_product, ExhaustiveSummary};
use kcagree::hashing::verify::{observations, universality, SUBSETS_MAX_RHO};
use kcagree::hashing::{lemma5_check, ratio_string, CompatibleSets, Lemma5Mode};
use kcagree::protocols::{by_name, estimate_agreement, LevinSearch};
use kcagree::reductions::decider::verdict_name;
use kcagree::reductions::eve::{count_s, measured_constant, Budgeted};
use kcagree::reductions::{
    eve_decider, gl_list_decode, leakage_experiment, reference_decider, BreakerConfig, ConstDecider,
    Decider, Eve, Majority, NoisyOracle, Parity, PosteriorEve, PromiseParams, RandomEve, SubprocessDecider,
    ToyDhKeyDecider, Verdict,
};
use kcagree::seed::{derive, streams, trial_rng};
use kcagree::stats::BinomialEstimate;
use kcagree::toyvm::{interactive_complexity, plain_complexity, SearchBudget, TimePreset, VmLimits};
use kcagree::{encode_pair, Error};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::{CliError, CliResult, Outcome};

/// Fills defaults and checks required fields.
pub trait Resolve: Sized {
    fn with_defaults(self) -> CliResult<Self>;
}

fn required<T>(v: &Option<T>, flag: &str) -> CliResult<()> {
    if v.is_none() {
        return Err(CliError::Validation(format!("missing required parameter --{flag}")));
    }
    Ok(())
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn budget(wall: Option<Duration>) -> SearchBudget {
    SearchBudget::default().with_wall(wall)
}

fn outcome(result: serde_json::Value) -> Outcome {
    Outcome { result, table: None, warnings: Vec::new() }
}

fn limits_for(t: TimePreset, steps: Option<u64>, n: usize) -> VmLimits {
    match steps {
        Some(s) => VmLimits::steps(s),
        None => t.limits(n),
    }
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(default)]
pub struct CiConfig {
    #[arg(long)]
    pub pi: Option<BitString>,
    #[arg(long)]
    pub x: Option<BitString>,
    /// Time preset: n2 or nlogn.
    #[arg(long)]
    pub t: Option<TimePreset>,
    /// Explicit step budget per side; overrides the preset.
    #[arg(long)]
    pub steps: Option<u64>,
    /// Longest program pair searched, in bits.
    #[arg(long)]
    pub max_len: Option<usize>,
}

impl Resolve for CiConfig {
    fn with_defaults(mut self) -> CliResult<Self> {
        required(&self.pi, "pi")?;
        required(&self.x, "x")?;
        self.t.get_or_insert(TimePreset::N2);
        self.max_len.get_or_insert(12);
        Ok(self)
    }
}

pub fn run_ci(cfg: &CiConfig, wall: Option<Duration>) -> CliResult<Outcome> {
    let (pi, x) = (cfg.pi.clone().unwrap(), cfg.x.clone().unwrap());
    let n = encode_pair(&pi, &x).len();
    let limits = limits_for(cfg.t.unwrap(), cfg.steps, n);
    let value = interactive_complexity(&pi, &x, &limits, cfg.max_len.unwrap(), &budget(wall))?;
    Ok(outcome(json!({ "n": n, "t_steps": limits.max_steps, "value": value })))
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(default)]
pub struct CConfig {
    #[arg(long)]
    pub x: Option<BitString>,
    /// Condition string read by the program.
    #[arg(long)]
    pub cond: Option<BitString>,
    #[arg(long)]
    pub t: Option<TimePreset>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub max_len: Option<usize>,
}

impl Resolve for CConfig {
    fn with_defaults(mut self) -> CliResult<Self> {
        required(&self.x, "x")?;
        self.cond.get_or_insert_with(BitString::new);
        self.t.get_or_insert(TimePreset::N2);
        self.max_len.get_or_insert(15);
        Ok(self)
    }
}

pub fn run_c(cfg: &CConfig, wall: Option<Duration>) -> CliResult<Outcome> {
    let (x, cond) = (cfg.x.clone().unwrap(), cfg.cond.clone().unwrap());
    let n = x.len() + cond.len();
    let limits = limits_for(cfg.t.unwrap(), cfg.steps, n);
    let value = plain_complexity(&x, &cond, &limits, cfg.max_len.unwrap(), &budget(wall))?;
    Ok(outcome(json!({ "n": n, "t_steps": limits.max_steps, "value": value })))
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(default)]
pub struct HashConfig {
    /// Domain bits.
    #[arg(long)]
    pub rho: Option<usize>,
    /// Range bits.
    #[arg(long)]
    pub k: Option<usize>,
}

impl Resolve for HashConfig {
    fn with_defaults(mut self) -> CliResult<Self> {
        self.rho.get_or_insert(3);
        self.k.get_or_insert(2);
        Ok(self)
    }
}

pub fn run_hash(cfg: &HashConfig, _wall: Option<Duration>) -> CliResult<Outcome> {
    let (rho, k) = (cfg.rho.unwrap(), cfg.k.unwrap());
    let uni = universality(rho, k)?;
    let obs = if rho <= SUBSETS_MAX_RHO { Some(observations(rho, k)?) } else { None };
    let mut warnings = Vec::new();
    if obs.is_none() {
        warnings.push(format!("observations skipped: subsets are enumerated only for rho <= {SUBSETS_MAX_RHO}"));
    }
    let pass = uni.mismatches == 0 && obs.as_ref().is_none_or(|o| o.holds());
    Ok(Outcome {
        result: json!({
            "verdict": if pass { "pass" } else { "fail" },
            "universality": uni,
            "observations": obs,
        }),
        table: None,
        warnings,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// The single rectangle R.
    Trivial,
    /// Every product of set partitions, exhaustively.
    Product,
    /// Every one-round adaptive family, exhaustively.
    Adaptive,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(default)]
pub struct Lemma5Config {
    #[arg(long)]
    pub rho_a: Option<usize>,
    #[arg(long)]
    pub rho_b: Option<usize>,
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// exact or montecarlo; only the trivial family has a Monte-Carlo mode.
    #[arg(long)]
    pub mode: Option<Lemma5Mode>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Resolve for Lemma5Config {
    fn with_defaults(mut self) -> CliResult<Self> {
        self.rho_a.get_or_insert(2);
        self.rho_b.get_or_insert(2);
        self.family.get_or_insert(Family::Product);
        self.mode.get_or_insert(Lemma5Mode::Exact);
        self.trials.get_or_insert(10_000);
        self.seed.get_or_insert(0);
        if self.family != Some(Family::Trivial) && self.mode == Some(Lemma5Mode::Montecarlo) {
            return Err(invalid("montecarlo mode needs --family trivial"));
        }
        Ok(self)
    }
}

fn summary_json(s: &ExhaustiveSummary) -> serde_json::Value {
    json!({
        "rho_a": s.rho_a,
        "rho_b": s.rho_b,
        "adaptive": s.adaptive,
        "families": s.families,
        "min_defined_mass": ratio_string(&s.min_defined_mass),
        "max_distance": ratio_string(&s.max_distance),
        "max_small_set_mass": ratio_string(&s.max_small_set_mass),
        "failures": s.failures,
        "verdict": if s.failures == 0 { "pass" } else { "fail" },
    })
}

pub fn run_lemma5(cfg: &Lemma5Config, _wall: Option<Duration>) -> CliResult<Outcome> {
    let (ra, rb) = (cfg.rho_a.unwrap(), cfg.rho_b.unwrap());
    let result = match cfg.family.unwrap() {
        Family::Trivial => {
            let r = lemma5_check(&CompatibleSets::trivial(ra, rb), cfg.mode.unwrap(), cfg.trials.unwrap(), derive(cfg.seed.unwrap(), streams::LEMMA5, 0))?;
            serde_json::to_value(r).expect("report serializes")
        }
        Family::Product => summary_json(&exhaustive_product(ra, rb)?),
        Family::Adaptive => summary_json(&exhaustive_adaptive(ra, rb)?),
    };
    Ok(outcome(result))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DeciderKind {
    /// Protocol-aware ToyDH key check.
    ToydhKey,
    /// Exact decider from toy-machine complexities.
    Reference,
    /// Always "outside N".
    ConstN,
    /// Always "outside Y".
    ConstY,
    /// External program speaking JSON lines.
    Plugin,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(default)]
pub struct BreakConfig {
    #[arg(long)]
    pub protocol: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Padded length 2n (even) or 2n+1 (odd).
    #[arg(long)]
    pub parity: Option<Parity>,
    #[arg(long, value_enum)]
    pub decider: Option<DeciderKind>,
    /// Shell command of the plugin decider, run once per query.
    #[arg(long)]
    pub plugin: Option<String>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub e: Option<f64>,
    #[arg(long)]
    pub t: Option<TimePreset>,
    /// Majority vote over this many decider calls (odd).
    #[arg(long)]
    pub reps: Option<u32>,
}

impl Resolve for BreakConfig {
    fn with_defaults(mut self) -> CliResult<Self> {
        self.protocol.get_or_insert_with(|| "toydh".into());
        self.n.get_or_insert(40);
        self.trials.get_or_insert(1000);
        self.seed.get_or_insert(0);
        self.epsilon.get_or_insert(0.1);
        self.parity.get_or_insert(Parity::Even);
        self.decider.get_or_insert(DeciderKind::ToydhKey);
        self.c.get_or_insert(4.0);
        self.e.get_or_insert(8.0);
        self.t.get_or_insert(TimePreset::N2);
        self.reps.get_or_insert(1);
        if self.decider == Some(DeciderKind::Plugin) {
            required(&self.plugin, "plugin")?;
        }
        Ok(self)
    }
}

fn build_decider(cfg: &BreakConfig, params: PromiseParams, wall: Option<Duration>) -> CliResult<Box<dyn Decider>> {
    let base: Box<dyn Decider> = match cfg.decider.unwrap() {
        DeciderKind::ToydhKey => Box::new(ToyDhKeyDecider),
        DeciderKind::Reference => Box::new(reference_decider(params).with_budget(budget(wall))),
        DeciderKind::ConstN => Box::new(ConstDecider(Verdict::OutsideN)),
        DeciderKind::ConstY => Box::new(ConstDecider(Verdict::OutsideY)),
        DeciderKind::Plugin => {
            let line = cfg.plugin.clone().unwrap();
            if line.trim().is_empty() {
                return Err(invalid("--plugin is empty"));
            }
            Box::new(SubprocessDecider::new("sh", vec!["-c".into(), line]))
        }
    };
    Ok(match cfg.reps.unwrap() {
        1 => base,
        r => Box::new(Majority::new(base, r)?),
    })
}

pub fn run_break(cfg: &BreakConfig, wall: Option<Duration>) -> CliResult<Outcome> {
    let params = PromiseParams::new(cfg.c.unwrap(), cfg.e.unwrap(), cfg.t.unwrap())?;
    let bcfg = BreakerConfig::new(cfg.epsilon.unwrap(), cfg.parity.unwrap())?;
    let spec = by_name(cfg.protocol.as_deref().unwrap(), cfg.c.unwrap(), cfg.t.unwrap())?;
    let decider = build_decider(cfg, params, wall)?;
    let mut warnings = params.warnings();
    warnings.extend(bcfg.warnings(Some(&params), None));
    let report = leakage_experiment(spec.as_ref(), decider.as_ref(), &bcfg, cfg.n.unwrap(), cfg.trials.unwrap(), cfg.seed.unwrap())?;
    let gap_positive = report.gap_positive();
    let mut result = serde_json::to_value(report).expect("report serializes");
    result["gap_positive"] = json!(gap_positive);
    result["regime"] = json!(params.regime());
    Ok(Outcome { result, table: None, warnings })
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(default)]
pub struct LevinConfig {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub t: Option<TimePreset>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Resolve for LevinConfig {
    fn with_defaults(mut self) -> CliResult<Self> {
        self.n.get_or_insert(16);
        self.c.get_or_insert(1.0);
        self.t.get_or_insert(TimePreset::N2);
        self.trials.get_or_insert(10_000);
        self.seed.get_or_insert(0);
        Ok(self)
    }
}

/// Disagreement bound `2^-k + 3 sigma` for `trials` runs.
pub fn levin_bound(k: usize, trials: u64) -> f64 {
    let p = (-(k as f64)).exp2();
    p + 3.0 * (p * (1.0 - p) / trials as f64).sqrt()
}

pub fn run_levin(cfg: &LevinConfig, _wall: Option<Duration>) -> CliResult<Outcome> {
    let (n, trials) = (cfg.n.unwrap(), cfg.trials.unwrap());
    let spec = LevinSearch::new(cfg.c.unwrap(), cfg.t.unwrap())?;
    let lay = spec.layout(n);
    let agree = estimate_agreement(&spec, n, trials, cfg.seed.unwrap())?;
    let disagree = BinomialEstimate::new(trials - agree.successes, trials);
    let bound = levin_bound(lay.k, trials);
    Ok(outcome(json!({
        "k": lay.k,
        "t_steps": lay.t,
        "transcript_len": lay.total_len(),
        "collision_probability": ratio_string(&spec.collision_probability(n)),
        "agreement_lower_bound": ratio_string(&spec.agreement_lower_bound(n)),
        "agreement": agree,
        "disagreement": disagree,
        "disagreement_bound": bound,
        "within_bound": disagree.estimate <= bound,
    })))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DecideKind {
    Reference,
    Eve,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EveKind {
    /// Uniform guess of the key length.
    Random,
    /// First hash preimage under a uniform prior.
    Posterior,
}

fn build_eve(kind: EveKind, c: f64, wall: Option<Duration>) -> Box<dyn Eve> {
    let inner: Box<dyn Eve> = match kind {
        EveKind::Random => Box::new(RandomEve { c }),
        EveKind::Posterior => Box::new(PosteriorEve { c }),
    };
    match wall {
        Some(limit) => Box::new(Budgeted { inner, limit }),
        None => inner,
    }
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(default)]
pub struct DecideConfig {
    #[arg(long)]
    pub pi: Option<BitString>,
    #[arg(long)]
    pub x: Option<BitString>,
    #[arg(long, value_enum)]
    pub decider: Option<DecideKind>,
    #[arg(long, value_enum)]
    pub eve: Option<EveKind>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub e: Option<f64>,
    #[arg(long)]
    pub t: Option<TimePreset>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Resolve for DecideConfig {
    fn with_defaults(mut self) -> CliResult<Self> {
        required(&self.pi, "pi")?;
        required(&self.x, "x")?;
        self.decider.get_or_insert(DecideKind::Reference);
        self.eve.get_or_insert(EveKind::Posterior);
        self.c.get_or_insert(1.0);
        self.e.get_or_insert(4.0);
        self.t.get_or_insert(TimePreset::N2);
        self.seed.get_or_insert(0);
        Ok(self)
    }
}

pub fn run_decide(cfg: &DecideConfig, wall: Option<Duration>) -> CliResult<Outcome> {
    let (pi, x) = (cfg.pi.clone().unwrap(), cfg.x.clone().unwrap());
    let c = cfg.c.unwrap();
    match cfg.decider.unwrap() {
        DecideKind::Reference => {
            let params = PromiseParams::new(c, cfg.e.unwrap(), cfg.t.unwrap())?;
            let d = reference_decider(params).with_budget(budget(wall)).evaluate(&encode_pair(&pi, &x))?;
            Ok(Outcome {
                result: serde_json::to_value(d).expect("decision serializes"),
                table: None,
                warnings: params.warnings(),
            })
        }
        DecideKind::Eve => {
            let eve = build_eve(cfg.eve.unwrap(), c, wall);
            let v = eve_decider(eve.as_ref(), &pi, &x, c, cfg.seed.unwrap())?;
            Ok(outcome(json!({ "eve": eve.name(), "verdict": verdict_name(v) })))
        }
    }
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(default)]
pub struct GlConfig {
    /// Secret length.
    #[arg(long)]
    pub n: Option<usize>,
    /// Per-query correctness of the oracle.
    #[arg(long)]
    pub p: Option<f64>,
    /// Advantage assumed by the decoder; defaults to 2p - 1.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub guard: Option<usize>,
    #[arg(long)]
    pub runs: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Resolve for GlConfig {
    fn with_defaults(mut self) -> CliResult<Self> {
        self.n.get_or_insert(16);
        let p = *self.p.get_or_insert(0.85);
        if !(0.5..=1.0).contains(&p) || p == 0.5 {
            return Err(invalid(format!("p must lie in (1/2, 1], got {p}")));
        }
        self.alpha.get_or_insert(2.0 * p - 1.0);
        self.guard.get_or_insert(kcagree::reductions::gl::DEFAULT_GUARD);
        self.runs.get_or_insert(200);
        self.seed.get_or_insert(0);
        Ok(self)
    }
}

/// One list-decoding run: secret, whether it is listed, and the best guess.
pub fn gl_run(n: usize, p: f64, alpha: f64, guard: usize, seed: u64, i: u64) -> kcagree::Result<(BitString, bool, bool, usize)> {
    let x = kcagree::protocols::random_bits(n, &mut trial_rng(seed, streams::UNIFORM, i));
    let oracle = NoisyOracle { x: x.clone(), p };
    let d = gl_list_decode(&oracle, n, alpha, guard, derive(seed, streams::GL, i))?;
    let listed = d.list.contains(&x);
    Ok((x.clone(), listed, d.best == x, d.m))
}

pub fn run_gl(cfg: &GlConfig, _wall: Option<Duration>) -> CliResult<Outcome> {
    let (n, p, alpha, guard, runs, seed) =
        (cfg.n.unwrap(), cfg.p.unwrap(), cfg.alpha.unwrap(), cfg.guard.unwrap(), cfg.runs.unwrap(), cfg.seed.unwrap());
    if runs == 0 {
        return Err(invalid("runs must be positive"));
    }
    let rows = (0..runs).map(|i| gl_run(n, p, alpha, guard, seed, i)).collect::<kcagree::Result<Vec<_>>>()?;
    let listed = rows.iter().filter(|r| r.1).count() as u64;
    let best = rows.iter().filter(|r| r.2).count() as u64;
    let m = rows[0].3;
    let table = rows
        .iter()
        .enumerate()
        .map(|(i, (x, l, b, _))| vec![i.to_string(), x.to_string(), l.to_string(), b.to_string()])
        .collect();
    Ok(Outcome {
        result: json!({
            "m": m,
            "list_size": 1u64 << m,
            "listed": BinomialEstimate::new(listed, runs),
            "best_correct": BinomialEstimate::new(best, runs),
        }),
        table: Some((vec!["run", "x", "listed", "best_correct"], table)),
        warnings: Vec::new(),
    })
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(default)]
pub struct SCountConfig {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub ell_max: Option<usize>,
    #[arg(long, value_enum)]
    pub eve: Option<EveKind>,
    #[arg(long)]
    pub trials_per_pair: Option<u64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub t: Option<TimePreset>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Resolve for SCountConfig {
    fn with_defaults(mut self) -> CliResult<Self> {
        self.n.get_or_insert(6);
        self.ell_max.get_or_insert(10);
        self.eve.get_or_insert(EveKind::Random);
        self.trials_per_pair.get_or_insert(3);
        self.c.get_or_insert(1.0);
        self.t.get_or_insert(TimePreset::N2);
        self.seed.get_or_insert(0);
        Ok(self)
    }
}

pub fn run_s_count(cfg: &SCountConfig, wall: Option<Duration>) -> CliResult<Outcome> {
    let c = cfg.c.unwrap();
    let eve = build_eve(cfg.eve.unwrap(), c, wall);
    let counts = (0..=cfg.ell_max.unwrap())
        .map(|ell| {
            count_s(cfg.n.unwrap(), ell, eve.as_ref(), c, cfg.t.unwrap(), cfg.trials_per_pair.unwrap(), cfg.seed.unwrap(), &budget(wall))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let table = counts
        .iter()
        .map(|s| {
            vec![s.n.to_string(), s.ell.to_string(), s.level_size.to_string(), s.size.to_string(), s.ratio.to_string()]
        })
        .collect();
    Ok(Outcome {
        result: json!({ "constant": measured_constant(&counts), "counts": counts }),
        table: Some((vec!["n", "ell", "level_size", "size", "ratio"], table)),
        warnings: Vec::new(),
    })
}
