//! `kcagree` command-line harness.

mod experiments;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use experiments::*;

#[derive(Parser, Debug)]
#[command(name = "kcagree", version, about = "Interactive Kolmogorov complexity and key-agreement laboratory")]
struct Cli {
    /// JSON file with experiment parameters; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for parallel trials.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Exact time-bounded interactive complexity of (pi, x).
    Ci(CiConfig),
    /// Exact time-bounded plain complexity of x.
    C(CConfig),
    /// Hash family checks.
    #[command(subcommand)]
    Hash(HashCmd),
    /// Two-hash lemma on a family of compatible sets.
    Lemma5(Lemma5Config),
    /// Breaker predicate gap experiment.
    Break(BreakConfig),
    /// Levin-search protocol agreement.
    Levin(LevinConfig),
    /// Decide one pair with the reference or the Eve-driven decider.
    Decide(DecideConfig),
    /// List decoding with a noisy parity oracle.
    Gl(GlConfig),
    /// Enumerate the sets S_{n,l}.
    SCount(SCountConfig),
}

#[derive(Subcommand, Debug)]
enum HashCmd {
    /// Universality and the single-hash observations.
    Verify(HashConfig),
}

pub enum CliError {
    Validation(String),
    Budget(String),
}

impl From<kcagree::Error> for CliError {
    fn from(e: kcagree::Error) -> Self {
        if e.is_budget() {
            CliError::Budget(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Result of one experiment: JSON body plus optional table for CSV.
pub struct Outcome {
    pub result: Value,
    pub table: Option<(Vec<&'static str>, Vec<Vec<String>>)>,
    pub warnings: Vec<String>,
}

/// Flags over config file over defaults.
fn resolve<T: Serialize + DeserializeOwned>(flags: &T, file: Option<&Value>) -> CliResult<T> {
    let mut merged = match file {
        Some(v) if v.is_object() => v.clone(),
        Some(_) => return Err(CliError::Validation("config file must hold a JSON object".into())),
        None => json!({}),
    };
    let given = serde_json::to_value(flags).expect("flags serialize");
    for (k, v) in given.as_object().expect("flags are an object") {
        if !v.is_null() {
            merged[k] = v.clone();
        }
    }
    serde_json::from_value(merged).map_err(|e| CliError::Validation(format!("config: {e}")))
}

fn budget_from_env() -> CliResult<Option<Duration>> {
    match std::env::var("KCAGREE_BUDGET_MS") {
        Ok(s) => s
            .trim()
            .parse::<u64>()
            .map(|ms| Some(Duration::from_millis(ms)))
            .map_err(|_| CliError::Validation(format!("KCAGREE_BUDGET_MS must be an integer, got {s:?}"))),
        Err(_) => Ok(None),
    }
}

fn run<T: Serialize + DeserializeOwned + Resolve>(
    name: &str,
    flags: &T,
    file: Option<&Value>,
    wall: Option<Duration>,
    exec: impl FnOnce(&T, Option<Duration>) -> CliResult<Outcome>,
) -> CliResult<(Value, Outcome)> {
    let cfg = resolve(flags, file)?.with_defaults()?;
    let out = exec(&cfg, wall)?;
    let report = json!({
        "schema": 1,
        "version": kcagree::VERSION,
        "experiment": name,
        "config": cfg,
        "warnings": out.warnings,
        "result": out.result,
    });
    Ok((report, out))
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

fn main_inner() -> CliResult<()> {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Ok(()),
                _ => Err(CliError::Validation(String::new())),
            };
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Validation("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Validation(e.to_string()))?;
    }
    let file = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", p.display())))?;
            Some(
                serde_json::from_str::<Value>(&text)
                    .map_err(|e| CliError::Validation(format!("malformed config {}: {e}", p.display())))?,
            )
        }
        None => None,
    };
    let file = file.as_ref();
    let wall = budget_from_env()?;
    let (report, out) = match &cli.cmd {
        Cmd::Ci(f) => run("ci", f, file, wall, run_ci)?,
        Cmd::C(f) => run("c", f, file, wall, run_c)?,
        Cmd::Hash(HashCmd::Verify(f)) => run("hash-verify", f, file, wall, run_hash)?,
        Cmd::Lemma5(f) => run("lemma5", f, file, wall, run_lemma5)?,
        Cmd::Break(f) => run("break", f, file, wall, run_break)?,
        Cmd::Levin(f) => run("levin", f, file, wall, run_levin)?,
        Cmd::Decide(f) => run("decide", f, file, wall, run_decide)?,
        Cmd::Gl(f) => run("gl", f, file, wall, run_gl)?,
        Cmd::SCount(f) => run("s-count", f, file, wall, run_s_count)?,
    };
    let text = match cli.format {
        Format::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
        Format::Csv => match &out.table {
            Some((header, rows)) => csv_text(header, rows),
            None => return Err(CliError::Validation("this experiment has no tabular output".into())),
        },
    };
    match &cli.output {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", p.display())))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            if !msg.is_empty() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(2)
        }
        Err(CliError::Budget(msg)) => {
            eprintln!("budget exceeded: {msg}");
            ExitCode::from(3)
        }
    }
}
