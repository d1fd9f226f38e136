//! Acceptance criteria, one line each. Run with
//! `cargo test -p countercollusion-cli --test acceptance -- --nocapture`.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use countercollusion::contracts::fuzz;
use countercollusion::crypto::{selftest, GroupParams, Toy};
use countercollusion::gametheory::{self, BuildOptions, GameId};
use countercollusion::ledger::{Money, Params};
use countercollusion::protocol::{
    self, CloudStrategy, CoalitionRole, CtpAction, ProtocolError, ReportChoice, Scenario,
};

const TABLE_BUDGET: Duration = Duration::from_secs(10);
const EQUILIBRIUM_BUDGET: Duration = Duration::from_secs(5);
const K_MAX: u64 = 10_000_000;
const TOL: f64 = 1e-6;
const TRIALS: usize = 1000;
const FUZZ_RUNS: u64 = 1000;
const ANALYZE_FAILED: i32 = 4;
/// The client pays both wages on matching results; the no-dispute path.
const PAID_ON_MATCH: &str = "ctp/pay/clause-8b";

struct Line {
    n: u8,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn params_with_t(w: u64, c: u64, ch: u64, d: u64, b: u64, dt: i64) -> Params {
    let mut p = Params::new(w, c, ch, d, 0, b);
    p.t = Money((p.z() + d as i64 - b as i64 + dt) as u64);
    p
}

fn table_sets() -> Vec<(&'static str, Params)> {
    vec![
        ("example", Params::example()),
        ("d = c+ch+1", Params::new(60, 4, 121, 126, 200, 2)),
        ("b = c-1", Params::new(100, 10, 201, 212, 309, 9)),
        ("t = z+d-b+1", params_with_t(100, 10, 201, 230, 5, 1)),
        ("all three", params_with_t(100, 10, 201, 212, 9, 1)),
    ]
}

fn criterion_1() -> Line {
    let start = Instant::now();
    let mut rows = 0;
    let mut bad = Vec::new();
    let sets = table_sets();
    for (name, p) in &sets {
        assert!(p.validate().is_empty(), "{name}: {p:?}");
        for id in GameId::ALL {
            match gametheory::payoff_crosscheck(id, *p) {
                Ok(x) => {
                    rows += x.rows.len();
                    bad.extend(x.mismatches.iter().map(|m| format!("{name} {id} {m}")));
                }
                Err(e) => bad.push(format!("{name} {id}: {e}")),
            }
        }
    }
    let took = start.elapsed();
    Line {
        n: 1,
        name: "payoff-table equivalence",
        pass: bad.is_empty() && took < TABLE_BUDGET,
        detail: format!(
            "{} param sets, {rows} terminals, {} mismatches, {:.2}s (budget {}s){}",
            sets.len(),
            bad.len(),
            took.as_secs_f64(),
            TABLE_BUDGET.as_secs(),
            if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) }
        ),
    }
}

fn criterion_2() -> Line {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for id in GameId::ALL {
        let g = gametheory::build_game(id, Params::example()).expect("valid example");
        let a = gametheory::claimed_equilibrium(&g);
        let r = gametheory::check_sequential_rationality(&g, &a).expect("well-formed claim");
        let exempt = gametheory::strict_exemptions(&g);
        let exempt: Vec<&str> = exempt.iter().map(String::as_str).collect();
        let strict = r.strict_failures(&exempt);
        let c = gametheory::check_consistency(&g, &a, |k| gametheory::sequence_profile(&g, k), K_MAX, TOL)
            .expect("sequence defined");
        let ok = r.is_rational() && strict.is_empty() && c.consistent && c.final_residual <= TOL && c.order_one_over_k;
        pass &= ok;
        let mut s = format!("{id} residual {:.1e}", c.final_residual);
        if !ok {
            s += &format!(" FAIL max gain {} [{}]", r.max_gain(), strict.join(", "));
        }
        parts.push(s);
    }
    let took = start.elapsed();
    pass &= took < EQUILIBRIUM_BUDGET;
    Line {
        n: 2,
        name: "equilibrium verification",
        pass,
        detail: format!("{}; {:.2}s (budget {}s)", parts.join("; "), took.as_secs_f64(), EQUILIBRIUM_BUDGET.as_secs()),
    }
}

fn criterion_3() -> Line {
    let mut parts = Vec::new();
    let mut pass = true;
    for id in GameId::ALL {
        for expand in [false, true] {
            let g = gametheory::build_game_with(id, Params::example(), BuildOptions { expand, ..BuildOptions::default() })
                .expect("valid example");
            let dist = g.play(&gametheory::claimed_equilibrium(&g).profile);
            let ok = dist.len() == 1 && dist.get(id.predicted()).is_some_and(|p| *p == gametheory::q(1));
            pass &= ok;
            if !expand {
                parts.push(format!("{id} -> {:?}", dist.iter().map(|(k, v)| format!("{k}:{v}")).collect::<Vec<_>>()));
            }
        }
    }
    Line { n: 3, name: "equilibrium outcomes", pass, detail: parts.join("; ") }
}

fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_countercollusion"))
}

fn analyze_exit(game: &str, p: Params) -> (i32, serde_json::Value) {
    let dir = std::env::temp_dir().join(format!("cc-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join(format!("{game}-{}-{}-{}.json", p.d.0, p.t.0, p.b.0));
    std::fs::write(&cfg, serde_json::json!({ "params": p }).to_string()).unwrap();
    let out = Command::new(bin()).args(["analyze", "--json", "--game", game, "--config"]).arg(&cfg).output().unwrap();
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap_or_default();
    (out.status.code().unwrap_or(-1), report)
}

fn criterion_4() -> Line {
    let z_d_b = params_with_t(100, 10, 201, 212, 5, 0);
    let cases = [
        ("d = c+ch, G1", "g1", Params::new(100, 10, 201, 211, 309, 5), "v2"),
        ("d = 1, G1", "g1", Params::new(100, 10, 201, 1, 309, 5), "I2"),
        ("t = z+d-b, G2", "g2", z_d_b, "v5"),
        ("t < z+d-b, G2", "g2", params_with_t(100, 10, 201, 212, 5, -20), "v5"),
        ("b = c, G2", "g2", Params::new(100, 10, 201, 212, 309, 10), "I1.1"),
        ("b > c, G2", "g2", Params::new(100, 10, 201, 212, 309, 15), "I1.1"),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, game, p, site) in cases {
        let (code, report) = analyze_exit(game, p);
        let failures: Vec<String> = report["body"]["strict_failures"]
            .as_array()
            .map(|a| a.iter().filter_map(|v| v.as_str().map(str::to_string)).collect())
            .unwrap_or_default();
        let ok = code == ANALYZE_FAILED && failures.iter().any(|f| f.contains(site));
        pass &= ok;
        parts.push(format!("{name}: exit {code} at {}", failures.first().map_or("-", String::as_str)));
    }
    // and the same commands pass on the valid example
    let (g1, _) = analyze_exit("g1", Params::example());
    let (g2, _) = analyze_exit("g2", Params::example());
    pass &= g1 == 0 && g2 == 0;
    parts.push(format!("example: exit {g1}/{g2}"));
    Line { n: 4, name: "boundary sensitivity", pass, detail: parts.join("; ") }
}

fn criterion_5() -> Line {
    let r = selftest::run(selftest::BUILTIN_VECTORS, TRIALS, 0xacce).expect("built-in vectors parse");
    let trials: Vec<String> = r.trials.iter().map(|t| format!("{:?} {} {}/{}", t.group, t.kind, t.failures, t.trials)).collect();
    let enough = r.trials.iter().all(|t| t.trials >= TRIALS);
    let secp_clean = r.trials.iter().filter(|t| t.group == countercollusion::crypto::GroupId::Secp256k1).all(|t| t.failures == 0);
    let s = &r.secp256k1_sizes;
    let sizes = s.eq_proof_bits == 768 && s.neq_proof_bits == 1536;
    Line {
        n: 5,
        name: "crypto suite",
        pass: r.passed && enough && secp_clean && sizes,
        detail: format!(
            "{}/{} vectors; {}; eq {} bits, neq {} bits",
            r.vectors.iter().filter(|v| v.passed).count(),
            r.vectors.len(),
            trials.join(", "),
            s.eq_proof_bits,
            s.neq_proof_bits
        ),
    }
}

fn criterion_6() -> Line {
    let runs = fuzz::random_schedules(FUZZ_RUNS);
    let failed: Vec<&fuzz::FuzzRun> = runs.iter().filter(|r| !r.passed()).collect();
    let msgs: usize = runs.iter().map(|r| r.messages).sum();
    let accepted: usize = runs.iter().map(|r| r.accepted).sum();
    Line {
        n: 6,
        name: "conservation",
        pass: runs.len() as u64 == FUZZ_RUNS && failed.is_empty(),
        detail: format!(
            "{} schedules, {msgs} messages ({accepted} accepted), {} violating{}",
            runs.len(),
            failed.len(),
            failed.first().map_or(String::new(), |r| format!("; seed {}: {:?}", r.seed, r.violations))
        ),
    }
}

fn all_strategies() -> Vec<CloudStrategy> {
    let mut v = Vec::new();
    for role in [CoalitionRole::Honest, CoalitionRole::Initiate, CoalitionRole::Accept, CoalitionRole::Reject] {
        for rep in [ReportChoice::NoReport, ReportChoice::ReportCorrect, ReportChoice::ReportWrong] {
            for a in [CtpAction::Fx, CtpAction::R, CtpAction::Other, CtpAction::Withhold] {
                v.push(CloudStrategy::new(role, rep, a));
            }
        }
    }
    v
}

fn criterion_7() -> Line {
    let gp = GroupParams::<Toy>::default_setup();
    let strategies = all_strategies();
    let sets = table_sets();
    let mut profiles = Vec::new();
    for (_, p) in &sets {
        for &a in &strategies {
            for &b in &strategies {
                profiles.push((*p, a, b));
            }
        }
    }
    // (outlay, 2w, settled by matching results)
    let results: Vec<Result<Option<(i64, i64, bool)>, String>> = profiles
        .par_iter()
        .enumerate()
        .map(|(k, &(p, a, b))| match protocol::run(gp.clone(), &Scenario::new(p, a, b, k as u64)) {
            Ok(o) => {
                let settled = !o.ttp_invoked && o.clauses.iter().any(|c| c == PAID_ON_MATCH);
                Ok(Some((o.client_outlay(), 2 * p.w.as_i64(), settled)))
            }
            Err(ProtocolError::InconsistentStrategies(_)) => Ok(None),
            Err(e) => Err(format!("{a:?} {b:?}: {e}")),
        })
        .collect();
    let mut ran = 0;
    let mut undisputed = 0;
    let mut bad = Vec::new();
    for r in &results {
        match r {
            Ok(Some((outlay, cap, settled))) => {
                ran += 1;
                if outlay > cap {
                    bad.push(format!("outlay {outlay} > {cap}"));
                }
                if *settled {
                    undisputed += 1;
                    if outlay != cap {
                        bad.push(format!("undisputed outlay {outlay} != {cap}"));
                    }
                }
            }
            Ok(None) => {}
            Err(e) => bad.push(e.clone()),
        }
    }
    let max_ratio = results
        .iter()
        .filter_map(|r| r.as_ref().ok().copied().flatten())
        .map(|(o, cap, _)| o as f64 / cap as f64)
        .fold(f64::MIN, f64::max);
    Line {
        n: 7,
        name: "client-cost bound",
        pass: bad.is_empty() && ran > 0,
        detail: format!(
            "{ran} scenarios over {} param sets, {undisputed} undisputed at exactly 2w, max outlay/2w {max_ratio:.3}{}",
            sets.len(),
            bad.first().map_or(String::new(), |b| format!("; {} violations, e.g. {b}", bad.len()))
        ),
    }
}

#[test]
fn acceptance() {
    let lines = [criterion_1(), criterion_2(), criterion_3(), criterion_4(), criterion_5(), criterion_6(), criterion_7()];
    for l in &lines {
        println!("criterion {} {:<26} {}  {}", l.n, l.name, if l.pass { "PASS" } else { "FAIL" }, l.detail);
    }
    let failed: Vec<u8> = lines.iter().filter(|l| !l.pass).map(|l| l.n).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
