use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_countercollusion"));
    c.env("COUNTERCOLLUSION_GROUP", "toy");
    c
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cc-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write(name: &str, v: &Value) -> PathBuf {
    let p = scratch(name);
    fs::write(&p, v.to_string()).unwrap();
    p
}

fn params(w: u64, c: u64, ch: u64, d: u64, t: u64, b: u64) -> Value {
    json!({ "w": w, "c": c, "ch": ch, "d": d, "t": t, "b": b })
}

fn example() -> Value {
    params(100, 10, 201, 212, 309, 5)
}

fn strategy(role: &str, report: &str, action: &str) -> Value {
    json!({ "coalition_role": role, "report_choice": report, "ctp_action": action })
}

fn run_json(args: &[&str], config: Option<&Path>) -> (i32, Value, Output) {
    let mut cmd = bin();
    cmd.args(args).arg("--json");
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    let out = cmd.output().unwrap();
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), v, out)
}

#[test]
fn check_params_lists_every_relation() {
    let cfg = write("valid.json", &json!({ "params": example() }));
    let (code, r, _) = run_json(&["check-params"], Some(&cfg));
    assert_eq!(code, 0);
    assert_eq!(r["kind"], "check-params");
    assert_eq!(r["body"]["z"], 101);
    assert_eq!(r["body"]["relations"].as_array().unwrap().len(), 5);

    let cfg = write("ch.json", &json!({ "params": params(100, 10, 200, 212, 309, 5) }));
    let (code, r, _) = run_json(&["check-params"], Some(&cfg));
    assert_eq!(code, 2);
    let failed: Vec<&str> = r["body"]["relations"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|x| x["holds"] == false)
        .map(|x| x["relation"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"ch > 2w"), "{failed:?}");

    // t = z + d − b
    let cfg = write("t.json", &json!({ "params": params(100, 10, 201, 212, 308, 5) }));
    let (code, r, _) = run_json(&["check-params"], Some(&cfg));
    assert_eq!(code, 2);
    assert!(r["body"]["relations"].as_array().unwrap().iter().any(|x| x["relation"] == "t > z + d - b" && x["holds"] == false));
}

#[test]
fn configs_reject_unknown_fields() {
    let cfg = write("unknown.json", &json!({ "params": example(), "colour": "blue" }));
    let (code, _, out) = run_json(&["run"], Some(&cfg));
    assert_eq!(code, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
    let cfg = write("missing.json", &json!({ "seed": 3 }));
    assert_eq!(run_json(&["run"], Some(&cfg)).0, 2);
}

#[test]
fn run_reports_terminal_and_deltas() {
    let cfg = write("honest.json", &json!({ "params": example(), "seed": 1 }));
    let (code, r, _) = run_json(&["run"], Some(&cfg));
    assert_eq!(code, 0);
    assert_eq!(r["body"]["outcome"]["terminal_label"], "G1:v4");
    assert_eq!(r["body"]["outcome"]["balance_deltas"]["TTP"], 0);

    let cfg = write(
        "collude.json",
        &json!({
            "params": example(),
            "strategy_c1": strategy("initiate", "no-report", "r"),
            "strategy_c2": strategy("accept", "no-report", "r"),
        }),
    );
    let (code, r, _) = run_json(&["run"], Some(&cfg));
    assert_eq!(code, 0);
    assert_eq!(r["body"]["outcome"]["terminal_label"], "G2:v10");

    let cfg = write(
        "traitor.json",
        &json!({
            "params": example(),
            "strategy_c1": strategy("initiate", "no-report", "r"),
            "strategy_c2": strategy("accept", "report-correct", "r"),
        }),
    );
    let (code, r, _) = run_json(&["run"], Some(&cfg));
    assert_eq!(code, 0);
    let o = &r["body"]["outcome"];
    assert_eq!(o["terminal_label"], "G4:v28");
    let clauses: Vec<&str> = o["clauses"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    assert!(clauses.iter().any(|c| c.starts_with("ctt/")), "{clauses:?}");
}

#[test]
fn run_is_deterministic_per_seed() {
    let cfg = write(
        "det.json",
        &json!({
            "params": example(),
            "strategy_c1": strategy("honest", "no-report", "other"),
            "strategy_c2": strategy("honest", "no-report", "fx"),
        }),
    );
    let a = bin().args(["run", "--json", "--seed", "9", "--config"]).arg(&cfg).output().unwrap();
    let b = bin().args(["run", "--json", "--seed", "9", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    let c = bin().args(["run", "--json", "--seed", "10", "--config"]).arg(&cfg).output().unwrap();
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn run_rejects_invalid_params_and_writes_out() {
    let cfg = write("bad.json", &json!({ "params": params(100, 10, 201, 211, 309, 5) }));
    assert_eq!(run_json(&["run"], Some(&cfg)).0, 2);

    let out = scratch("report.json");
    let cfg = write("ok.json", &json!({ "params": example() }));
    let status = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert!(status.success());
    let r: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["kind"], "run");
    assert_eq!(r["exit_code"], 0);
}

#[test]
fn analyze_exit_codes() {
    let (code, r, _) = run_json(&["analyze", "--game", "g1"], None);
    assert_eq!(code, 0);
    assert_eq!(r["body"]["predicted"], "G1:v4");
    assert_eq!(r["body"]["ok"], true);

    let cfg = write("d1.json", &json!({ "params": params(100, 10, 201, 1, 309, 5) }));
    let (code, r, _) = run_json(&["analyze", "--game", "g1"], Some(&cfg));
    assert_eq!(code, 4);
    assert_eq!(r["body"]["utility_source"], "table");

    let (_, r, _) = run_json(&["analyze", "--game", "g4"], None);
    assert_eq!(r["body"]["predicted"], "G3:v13");
    assert_eq!(r["body"]["played"]["G3:v13"], "1");

    // breaking a structural relation is an invalid input, not a failed check
    let cfg = write("struct.json", &json!({ "params": params(100, 10, 199, 212, 309, 5) }));
    assert_eq!(run_json(&["analyze", "--game", "g1"], Some(&cfg)).0, 2);
    assert_eq!(run_json(&["analyze", "--game", "g9"], None).0, 2);
}

#[test]
fn analyze_expanded_trees() {
    let (code, r, _) = run_json(&["analyze", "--game", "g2", "--expand"], None);
    assert_eq!(code, 0);
    assert_eq!(r["body"]["crosscheck"]["rows"].as_array().unwrap().len(), 27);
}

#[test]
fn crypto_selftest_passes_and_names_corruption() {
    let (code, r, _) = run_json(&["crypto-selftest", "--trials", "200"], None);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["body"]["secp256k1_sizes"]["eq_proof_bits"], 768);

    let kat = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/vectors/kat.json");
    let mut v: Value = serde_json::from_str(&fs::read_to_string(kat).unwrap()).unwrap();
    v["toy"]["commit"][2]["c"] = json!(362);
    let path = write("corrupt.json", &v);
    let out = bin().args(["crypto-selftest", "--trials", "50", "--vectors"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL toy-commit-3-5"));
}

#[test]
fn batch_runs_every_scenario() {
    let cfg = write(
        "batch.json",
        &json!([
            { "params": example(), "seed": 1 },
            { "params": example(), "strategy_c1": strategy("initiate", "no-report", "r"), "strategy_c2": strategy("accept", "no-report", "r") },
            { "params": params(100, 10, 201, 211, 309, 5) },
        ]),
    );
    let (code, r, _) = run_json(&["batch"], Some(&cfg));
    assert_eq!(code, 2);
    let items = r["body"].as_array().unwrap();
    assert_eq!(items.len(), 3);
    assert_eq!(items[0]["body"]["outcome"]["terminal_label"], "G1:v4");
    assert_eq!(items[1]["body"]["outcome"]["terminal_label"], "G2:v10");
    assert_eq!(items[2]["exit_code"], 2);
}

#[test]
fn group_env_is_validated() {
    let cfg = write("env.json", &json!({ "params": example() }));
    let out = bin().env("COUNTERCOLLUSION_GROUP", "p256").args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
