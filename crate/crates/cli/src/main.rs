//! `countercollusion`: parameter checks, scenario runs, equilibrium analysis
//! and crypto self-tests, with JSON reports.
//!
//! Exit codes: 0 everything passed, 2 invalid config or parameters, 3 internal
//! invariant breach, 4 a check failed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use countercollusion::crypto::{selftest, GroupParams, Secp256k1, Toy};
use countercollusion::gametheory::{self, GameError, GameId};
use countercollusion::ledger::{Money, Params, Violation};
use countercollusion::protocol::{self, CloudStrategy, Outcome, ProtocolError, Scenario, Schedule, Task};

const OK: u8 = 0;
const INVALID: u8 = 2;
const BREACH: u8 = 3;
const FAILED: u8 = 4;

#[derive(Parser)]
#[command(name = "countercollusion", version, about = "Counter-collusion contracts: simulator and equilibrium checker")]
struct Cli {
    /// Print the JSON report instead of a summary.
    #[arg(long, global = true)]
    json: bool,
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the monetary parameters against the design constraints.
    CheckParams {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run one scenario end to end.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Verify the claimed equilibrium of one game.
    Analyze {
        #[arg(long, default_value = "g1")]
        game: String,
        /// Config whose `params` are used; the worked example otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Expand collapsed sub-game branches into full subtrees.
        #[arg(long)]
        expand: bool,
    },
    /// Known-answer vectors and randomized NIZK trials.
    CryptoSelftest {
        /// Vector file; the built-in vectors otherwise.
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a JSON array of scenario configs in parallel.
    Batch {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Scenario file. Only `params` is required; strategies default to honest.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioConfig {
    params: Params,
    #[serde(default)]
    task: Task,
    #[serde(default)]
    strategy_c1: CloudStrategy,
    #[serde(default)]
    strategy_c2: CloudStrategy,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    schedule: Schedule,
    #[serde(default)]
    funds: Option<Money>,
    /// Where `run` writes its report; `--out` takes precedence.
    #[serde(default)]
    out: Option<PathBuf>,
}

impl ScenarioConfig {
    fn scenario(&self) -> Scenario {
        let mut s = Scenario::new(self.params, self.strategy_c1, self.strategy_c2, self.seed);
        s.task = self.task.clone();
        s.schedule = self.schedule;
        if let Some(f) = self.funds {
            s.funds = f;
        }
        s
    }
}

#[derive(Serialize)]
struct Report {
    kind: &'static str,
    exit_code: u8,
    body: Value,
}

struct Done {
    report: Report,
    summary: String,
    out: Option<PathBuf>,
}

fn read_config(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn check_params(params: Params) -> Done {
    let relations: Vec<Value> = Violation::ALL
        .iter()
        .map(|v| json!({ "relation": v.relation(), "holds": params.holds(*v) }))
        .collect();
    let violations = params.validate();
    let code = if violations.is_empty() { OK } else { INVALID };
    let mut summary = String::new();
    for v in Violation::ALL {
        summary += &format!("{:<14} {}\n", v.relation(), if params.holds(v) { "ok" } else { "FAIL" });
    }
    summary += &format!("z = {}", params.z());
    Done {
        report: Report {
            kind: "check-params",
            exit_code: code,
            body: json!({ "params": params, "relations": relations, "z": params.z(), "valid": violations.is_empty() }),
        },
        summary,
        out: None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum GroupChoice {
    Toy,
    Secp256k1,
}

fn group_from_env() -> Result<GroupChoice> {
    match std::env::var("COUNTERCOLLUSION_GROUP").as_deref() {
        Err(_) | Ok("") | Ok("secp256k1") => Ok(GroupChoice::Secp256k1),
        Ok("toy") => Ok(GroupChoice::Toy),
        Ok(other) => bail!("COUNTERCOLLUSION_GROUP must be `toy` or `secp256k1`, not {other:?}"),
    }
}

fn run_with(group: GroupChoice, sc: &Scenario) -> Result<Outcome, ProtocolError> {
    match group {
        GroupChoice::Toy => protocol::run(GroupParams::<Toy>::default_setup(), sc),
        GroupChoice::Secp256k1 => protocol::run(GroupParams::<Secp256k1>::default_setup(), sc),
    }
}

fn protocol_exit(e: &ProtocolError) -> u8 {
    match e {
        ProtocolError::InvalidParams(_)
        | ProtocolError::InconsistentStrategies(_)
        | ProtocolError::InvalidSchedule(_)
        | ProtocolError::Task(_) => INVALID,
        _ => BREACH,
    }
}

fn run_one(group: GroupChoice, cfg: &ScenarioConfig) -> (u8, Value, String) {
    let sc = cfg.scenario();
    match run_with(group, &sc) {
        Ok(o) => {
            let summary = format!(
                "terminal {}\ndeltas {:?}\npayoffs {:?}\nttp invoked: {}\nclauses: {}",
                o.label(),
                o.balance_deltas,
                o.payoffs,
                o.ttp_invoked,
                o.clauses.join(" ")
            );
            let body = json!({
                "group": format!("{group:?}").to_lowercase(),
                "scenario": sc,
                "outcome": o,
            });
            (OK, body, summary)
        }
        Err(e) => {
            let code = protocol_exit(&e);
            (code, json!({ "scenario": sc, "error": e.to_string() }), format!("error: {e}"))
        }
    }
}

fn cmd_run(config: &Path, seed: Option<u64>) -> Result<Done> {
    let mut cfg = read_config(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let (code, body, summary) = run_one(group_from_env()?, &cfg);
    Ok(Done { report: Report { kind: "run", exit_code: code, body }, summary, out: cfg.out.clone() })
}

fn cmd_batch(config: &Path) -> Result<Done> {
    let text = fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let cfgs: Vec<ScenarioConfig> = serde_json::from_str(&text).with_context(|| format!("parsing {}", config.display()))?;
    let group = group_from_env()?;
    let results: Vec<(u8, Value, String)> = cfgs.par_iter().map(|c| run_one(group, c)).collect();
    let code = results.iter().map(|r| r.0).max().unwrap_or(OK);
    let summary = results
        .iter()
        .enumerate()
        .map(|(i, (c, _, s))| format!("[{i}] exit {c}: {}", s.lines().next().unwrap_or("")))
        .collect::<Vec<_>>()
        .join("\n");
    let body = Value::Array(results.into_iter().map(|(c, b, _)| json!({ "exit_code": c, "body": b })).collect());
    Ok(Done { report: Report { kind: "batch", exit_code: code, body }, summary, out: None })
}

fn cmd_analyze(game: &str, config: Option<&Path>, expand: bool) -> Result<Done> {
    let id: GameId = game.parse().map_err(|e: GameError| anyhow::anyhow!("{e}"))?;
    let params = match config {
        Some(p) => read_config(p)?.params,
        None => Params::example(),
    };
    let a = match gametheory::analyze(id, params, expand) {
        Ok(a) => a,
        Err(GameError::InvalidParams(v)) => {
            return Ok(Done {
                report: Report { kind: "analyze", exit_code: INVALID, body: json!({ "game": id, "params": params, "error": v }) },
                summary: format!("invalid parameters: {v}"),
                out: None,
            })
        }
        Err(e) => return Err(e.into()),
    };
    let mark = |b: bool| if b { "pass" } else { "FAIL" };
    let mut summary = format!("{id} with {params:?}\n");
    if !a.violations.is_empty() {
        summary += &format!("violated: {}\n", a.violations.iter().map(|v| v.relation()).collect::<Vec<_>>().join(", "));
    }
    if let Some(n) = &a.utility_note {
        summary += &format!("note: {n}\n");
    }
    summary += &format!("sequential rationality  {} (max gain {})\n", mark(a.checks.rational), a.rationality.max_gain());
    summary += &format!("strict deviation losses {}\n", mark(a.checks.strict));
    for f in &a.strict_failures {
        summary += &format!("  {f}\n");
    }
    summary += &format!(
        "consistency             {} (residual {:.3e} at k = {})\n",
        mark(a.checks.consistent),
        a.consistency.final_residual,
        a.consistency.points.last().map_or(0, |p| p.k)
    );
    summary += &match a.checks.crosscheck {
        Some(ok) => format!("table crosscheck        {}\n", mark(ok)),
        None => "table crosscheck        skipped\n".to_string(),
    };
    summary += &format!("predicted {}; play {:?} {}", a.predicted, a.played, mark(a.checks.outcome));
    let code = if a.ok { OK } else { FAILED };
    Ok(Done { report: Report { kind: "analyze", exit_code: code, body: serde_json::to_value(&a)? }, summary, out: None })
}

fn cmd_selftest(vectors: Option<&Path>, trials: usize, seed: u64) -> Result<Done> {
    let text = match vectors {
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => selftest::BUILTIN_VECTORS.to_string(),
    };
    let r = match selftest::run(&text, trials, seed) {
        Ok(r) => r,
        Err(e) => {
            return Ok(Done {
                report: Report { kind: "crypto-selftest", exit_code: INVALID, body: json!({ "error": e.to_string() }) },
                summary: format!("error: {e}"),
                out: None,
            })
        }
    };
    let mut summary = format!(
        "vectors: {}/{} pass\n",
        r.vectors.iter().filter(|v| v.passed).count(),
        r.vectors.len()
    );
    for v in r.failed_vectors() {
        summary += &format!("  FAIL {v}\n");
    }
    for t in &r.trials {
        summary += &format!("{:?} {}: {} trials, {} failures (allowed {})\n", t.group, t.kind, t.trials, t.failures, t.allowed);
    }
    summary += &format!(
        "secp256k1 sizes: commitment {} bits, eq proof {} bits, neq proof {} bits",
        r.secp256k1_sizes.commitment_bits, r.secp256k1_sizes.eq_proof_bits, r.secp256k1_sizes.neq_proof_bits
    );
    let code = if r.passed { OK } else { FAILED };
    Ok(Done { report: Report { kind: "crypto-selftest", exit_code: code, body: serde_json::to_value(&r)? }, summary, out: None })
}

fn dispatch(cli: &Cli) -> Result<Done> {
    match &cli.cmd {
        Cmd::CheckParams { config } => {
            let params = match config {
                Some(p) => read_config(p)?.params,
                None => Params::example(),
            };
            Ok(check_params(params))
        }
        Cmd::Run { config, seed } => cmd_run(config, *seed),
        Cmd::Analyze { game, config, expand } => cmd_analyze(game, config.as_deref(), *expand),
        Cmd::CryptoSelftest { vectors, trials, seed } => cmd_selftest(vectors.as_deref(), *trials, *seed),
        Cmd::Batch { config } => cmd_batch(config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let done = match dispatch(&cli) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(INVALID);
        }
    };
    let text = match serde_json::to_string_pretty(&done.report) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: serializing report: {e}");
            return ExitCode::from(BREACH);
        }
    };
    if let Some(path) = cli.out.as_ref().or(done.out.as_ref()) {
        if let Err(e) = fs::write(path, format!("{text}\n")) {
            eprintln!("error: writing {}: {e}", path.display());
            return ExitCode::from(INVALID);
        }
    }
    if cli.json {
        println!("{text}");
    } else {
        println!("{}", done.summary);
    }
    ExitCode::from(done.report.exit_code)
}
