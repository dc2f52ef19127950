use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kothe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kothe")).args(args).env("NO_COLOR", "1").output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn fixture(name: &str) -> String {
    format!("{}/../core/fixtures/dsl/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn annihilation_report_has_six_positive_verdicts() {
    let out = kothe(&["classify", "--builtin", "annihilation", "--json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["schema"], 1);
    let verdicts = doc["verdicts"].as_object().unwrap();
    assert_eq!(verdicts.len(), 6);
    assert!(verdicts.values().all(|v| v["status"] == "certified-holds"), "{verdicts:?}");
}

#[test]
fn gallery_entry_matches_expectations() {
    let out = kothe(&["gallery", "run", "prop4-1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let runs: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(runs[0]["name"], "prop4-1");
    assert_eq!(runs[0]["mismatches"].as_array().unwrap().len(), 0);
}

#[test]
fn gallery_list_names_every_entry() {
    let out = kothe(&["gallery", "list"]);
    assert_eq!(code(&out), 0);
    for name in ["annihilation", "prop4-3", "snake-s", "power-series-dual(loglog)"] {
        assert!(stdout(&out).lines().any(|l| l.starts_with(name)), "{name} missing");
    }
}

#[test]
fn malformed_kws_exits_two_with_a_located_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.kws");
    std::fs::write(&bad, "family bad {\n  v(m,k,j) = j - 2 * m\n}\n").unwrap();
    let out = kothe(&["classify", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("bad.kws:2:14: non-positive value"), "{err}");
    assert!(err.contains("^^^^^^^^^"), "{err}");
    assert!(!err.contains('\x1b'), "colour with NO_COLOR set");

    std::fs::write(&bad, "family bad {\n  v(m,k,j) = j +\n}\n").unwrap();
    let out = kothe(&["classify", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("bad.kws:3:"), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&kothe(&["classify"])), 2);
    assert_eq!(code(&kothe(&["classify", "--builtin", "no-such-space"])), 2);
    assert_eq!(code(&kothe(&["classify", "--builtin", "constant", "--levels", "0"])), 2);
    assert_eq!(code(&kothe(&["classify", "--builtin", "constant", "--window", "8"])), 2);
    assert_eq!(code(&kothe(&["frobnicate"])), 2);
    assert_eq!(code(&kothe(&["classify", "/no/such/file.kws"])), 2);
}

#[test]
fn identical_invocations_give_identical_bytes() {
    for args in [&["classify", "--random", "17"][..], &["classify", "--builtin", "prop4-2"], &["classify", "--builtin", "snake-lp", "--md"]] {
        let (a, b) = (kothe(args), kothe(args));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(code(&a), code(&b));
    }
}

#[test]
fn strict_never_passes_with_undecided_verdicts() {
    for args in [&["classify", "--random", "0"][..], &["classify", "--builtin", "snake-s"], &["classify", "--builtin", "prop4-2"]] {
        let plain = kothe(args);
        let doc: Value = serde_json::from_str(&stdout(&plain)).unwrap();
        let undecided = doc["verdicts"].as_object().unwrap().values().any(|v| v["status"] == "undecided");
        let strict = kothe(&[args, &["--strict"]].concat());
        if undecided {
            assert_eq!(code(&strict), 3, "{args:?}");
        } else {
            assert_eq!(code(&strict), code(&plain), "{args:?}");
        }
    }
}

#[test]
fn markdown_is_rendered_from_the_json_report() {
    let json: Value = serde_json::from_str(&stdout(&kothe(&["classify", "--builtin", "prop4-3"]))).unwrap();
    let md = stdout(&kothe(&["classify", "--builtin", "prop4-3", "--md"]));
    assert!(md.starts_with("# prop4-3"));
    for (name, v) in json["verdicts"].as_object().unwrap() {
        let row = format!("| {name} | {} |", v["status"].as_str().unwrap());
        assert!(md.contains(&row), "{row}");
    }
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = kothe(&["classify", "--builtin", "constant", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["space"], "constant");
}

#[test]
fn window_flags_reach_the_report() {
    let out = kothe(&["classify", "--builtin", "s-prime", "--levels", "3", "--grades", "2", "--window", "1024"]);
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["window"], serde_json::json!({"levels": 3, "grades": 2, "n": 1024}));
}

fn witness_roundtrip(dir: &Path, args: &[&str]) {
    let path = dir.join("w.json");
    let out = kothe(&[args, &["--out", path.to_str().unwrap()]].concat());
    assert_eq!(code(&out), 0, "{args:?}: {}", stderr(&out));
    let out = kothe(&["replay", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{args:?}: {}", stderr(&out));
    assert!(stdout(&out).starts_with("ok "));
}

#[test]
fn witnesses_replay_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    witness_roundtrip(dir.path(), &["witness", "transitivity", "--builtin", "power-series-dual(j)", "--y", "2:1/3", "--eps", "0.01"]);
    witness_roundtrip(dir.path(), &["witness", "periodic", "--builtin", "power-series-dual(j)", "--k", "2", "--eps", "0.01"]);
    witness_roundtrip(dir.path(), &["witness", "return-set", "--builtin", "prop4-1", "--eps", "0.0625"]);
    witness_roundtrip(dir.path(), &["witness", "hypercyclic", "--builtin", "s-prime", "--targets", "1:1;1:1,2:-1/2", "--eps", "0.1"]);
}

#[test]
fn tampered_witness_fails_replay() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.json");
    let out = kothe(&["witness", "transitivity", "--builtin", "s-prime", "--y", "1:2", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    doc["witness"]["y"] = serde_json::json!([[1, "3"]]);
    std::fs::write(&path, doc.to_string()).unwrap();
    let out = kothe(&["replay", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1, "{}", stdout(&out));
}

#[test]
fn witness_preconditions_are_reported() {
    let out = kothe(&["witness", "periodic", "--builtin", "prop4-1"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("precondition"), "{}", stderr(&out));
    assert_eq!(code(&kothe(&["witness", "transitivity", "--builtin", "constant", "--x", "1:x"])), 2);
}

#[test]
fn symbols_verify() {
    let out = kothe(&["symbol", "verify", "snake", "--n", "2000"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["certificate"]["coverage"]["diagonals"].as_u64().unwrap() > 10);
    assert_eq!(code(&kothe(&["symbol", "verify", "successor"])), 0);
    assert_eq!(code(&kothe(&["symbol", "verify", "snake(3)"])), 2);
    assert_eq!(code(&kothe(&["symbol", "verify", "zigzag"])), 2);
}

#[test]
fn fmt_canonicalizes_in_place() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p42.kws");
    std::fs::copy(fixture("p42.kws"), &path).unwrap();
    let p = path.to_str().unwrap();
    let printed = stdout(&kothe(&["fmt", p]));
    assert_eq!(code(&kothe(&["fmt", "--write", p])), 0);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), printed);
    assert_eq!(code(&kothe(&["fmt", "--check", p])), 0);
    std::fs::write(&path, "family f {v(m,k,j)=j^(-m)}").unwrap();
    assert_eq!(code(&kothe(&["fmt", "--check", p])), 1);
}

#[test]
fn kws_files_classify_like_builtins() {
    let a: Value = serde_json::from_str(&stdout(&kothe(&["classify", &fixture("p41.kws")]))).unwrap();
    let b: Value = serde_json::from_str(&stdout(&kothe(&["classify", "--builtin", "prop4-1"]))).unwrap();
    for p in ["ergodic-sufficient", "hypercyclic"] {
        assert_eq!(a["verdicts"][p]["status"], b["verdicts"][p]["status"], "{p}");
    }
}

#[test]
fn search_is_deterministic_given_seed() {
    let args = ["gallery", "search", "--seed", "5", "--count", "6", "--window", "512"];
    let (a, b) = (kothe(&args), kothe(&args));
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let doc: Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(doc["examined"], 6);
}
