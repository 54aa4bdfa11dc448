use std::fs;
use std::path::Path;
use std::process::Command as Process;

use serde_json::{json, Value};
use tempfile::TempDir;

use wittmod_cli::{run_command, strip_timing};

fn write_config(dir: &Path, name: &str, cfg: &Value) -> String {
    let path = dir.join(name);
    fs::write(&path, cfg.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

fn run_in(dir: &TempDir, args: &[&str]) -> (i32, Value) {
    let out = dir.path().join("report.json");
    let cache = dir.path().join("cache");
    let mut argv = vec!["wittmod"];
    argv.extend_from_slice(args);
    argv.extend_from_slice(&["--out", out.to_str().unwrap(), "--cache-dir", cache.to_str().unwrap()]);
    let code = run_command(argv);
    let report = fs::read_to_string(&out).map(|s| serde_json::from_str(&s).unwrap()).unwrap_or(Value::Null);
    (code, report)
}

fn ext21() -> Value {
    json!({"d": 2, "alpha": ["1/2", "1/3"], "module": {"variant": "exterior", "k": 1, "b": "1"}})
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(run_command(["wittmod", "frobnicate"]), 2);
    assert_eq!(run_command(["wittmod", "verify-rep"]), 2);
}

#[test]
fn verify_rep_passes_on_exterior() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "ext21.json", &ext21());
    let (code, report) = run_in(&dir, &["verify-rep", "--config", &cfg]);
    assert_eq!(code, 0);
    assert_eq!(report["schema"], "witt-report/1");
    assert_eq!(report["command"], "verify-rep");
    assert_eq!(report["outcome"], "pass");
    assert_eq!(report["result"]["checked"], 153 * 9 * 2);
    assert!(report["counterexample"].is_null());
    let keys: Vec<&String> = report.as_object().unwrap().keys().collect();
    assert_eq!(keys.last().unwrap().as_str(), "timing");
}

#[test]
fn certify_reducible_finds_certificate() {
    let dir = TempDir::new().unwrap();
    let mut cfg = ext21();
    cfg["window"] = json!({"N": 2});
    cfg["budget"] = json!({"R": 1, "T": 0});
    let path = write_config(dir.path(), "c.json", &cfg);
    let (code, report) = run_in(&dir, &["certify-reducible", "--config", &path]);
    assert_eq!(code, 0);
    assert_eq!(report["outcome"], "certificate");
    let ranks = report["result"]["certificate"]["ranks"].as_array().unwrap();
    assert_eq!(ranks.len(), 25);
    assert!(ranks.iter().all(|r| r["rank"] == 1));
}

#[test]
fn failures_carry_counterexamples() {
    let dir = TempDir::new().unwrap();
    let mut cfg = ext21();
    cfg["module"]["b"] = json!("0");
    cfg["window"] = json!({"N": 1});
    let path = write_config(dir.path(), "c.json", &cfg);
    let (code, report) = run_in(&dir, &["certify-reducible", "--config", &path]);
    assert_eq!(code, 1);
    assert_eq!(report["outcome"], "no_certificate");
    assert_eq!(report["counterexample"]["failure"], "not_invariant");

    // the de Rham image generates a proper submodule
    let mut cfg = ext21();
    cfg["window"] = json!({"N": 1});
    cfg["budget"] = json!({"R": 1, "T": 3});
    cfg["options"] = json!({"generators": [[
        {"n": [0, 0], "key": [1], "coeff": "1/2"},
        {"n": [0, 0], "key": [2], "coeff": "1/3"}
    ]]});
    let path = write_config(dir.path(), "cyc.json", &cfg);
    let (code, report) = run_in(&dir, &["cyclic", "--config", &path]);
    assert_eq!(code, 1);
    assert_eq!(report["outcome"], "not_covered");
    let shortfall = report["counterexample"]["shortfall"].as_array().unwrap();
    assert!(!shortfall.is_empty());
    assert!(shortfall.iter().all(|w| w["achieved"].as_u64().unwrap() <= 1));
}

#[test]
fn config_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let path = write_config(dir.path(), "bad.json", &json!({"d": 2}));
    assert_eq!(run_in(&dir, &["verify-rep", "--config", &path]).0, 2);
    fs::write(dir.path().join("broken.json"), "{not json").unwrap();
    let broken = dir.path().join("broken.json");
    assert_eq!(run_in(&dir, &["verify-rep", "--config", broken.to_str().unwrap()]).0, 2);
    assert_eq!(run_in(&dir, &["verify-rep", "--config", "/nonexistent/x.json"]).0, 2);
    // Nilsson without a degree bound
    let cfg = json!({"d": 2, "alpha": ["0", "0"], "module": {"variant": "nilsson", "beta": "1/2", "b": "0"}});
    let path = write_config(dir.path(), "nil.json", &cfg);
    assert_eq!(run_in(&dir, &["verify-rep", "--config", &path]).0, 2);
    // closure needs generators
    let path = write_config(dir.path(), "cl.json", &json!({"d": 2, "alpha": ["0", "0"], "module": {"variant": "exterior", "k": 1, "b": "1"}, "budget": {"R": 1, "T": 1}}));
    assert_eq!(run_in(&dir, &["closure", "--config", &path]).0, 2);
}

#[test]
fn broken_explicit_module_is_rejected_except_by_verify_gl() {
    let dir = TempDir::new().unwrap();
    let m = |rows: Value| rows;
    let zero = m(json!([["0"]]));
    let cfg = json!({
        "d": 2,
        "alpha": ["0", "0"],
        "module": {"variant": "explicit", "b": "1", "units": [[[["1"]], zero.clone()], [zero, [["1"]]]]},
    });
    let path = write_config(dir.path(), "x.json", &cfg);
    // E11 + E22 = 2 != b
    let (code, report) = run_in(&dir, &["verify-gl", "--config", &path]);
    assert_eq!(code, 0, "{report}");
    assert_eq!(run_in(&dir, &["verify-rep", "--config", &path]).0, 2);
}

#[test]
fn cache_hits_reproduce_reports_verbatim() {
    let dir = TempDir::new().unwrap();
    let cache = dir.path().join("c");
    let cfg = write_config(dir.path(), "e.json", &ext21());
    let out1 = dir.path().join("1.json");
    let out2 = dir.path().join("2.json");
    let args = |out: &Path| {
        vec![
            "wittmod".to_string(),
            "verify-rep".into(),
            "--config".into(),
            cfg.clone(),
            "--cache-dir".into(),
            cache.to_str().unwrap().into(),
            "--out".into(),
            out.to_str().unwrap().into(),
        ]
    };
    assert_eq!(run_command(args(&out1)), 0);
    assert_eq!(fs::read_dir(&cache).unwrap().count(), 1);
    assert_eq!(run_command(args(&out2)), 0);
    assert_eq!(fs::read(&out1).unwrap(), fs::read(&out2).unwrap());

    // an equivalent config with unnormalized rationals shares the entry
    let mut v = ext21();
    v["alpha"] = json!(["2/4", "1/3"]);
    let cfg2 = write_config(dir.path(), "e2.json", &v);
    let out3 = dir.path().join("3.json");
    let mut a = args(&out3);
    a[3] = cfg2;
    assert_eq!(run_command(a), 0);
    assert_eq!(fs::read(&out1).unwrap(), fs::read(&out3).unwrap());
}

#[test]
fn cached_failures_keep_their_exit_code() {
    let dir = TempDir::new().unwrap();
    let mut v = ext21();
    v["options"] = json!({"other": {"alpha": ["1/3", "0"], "module": {"variant": "exterior", "k": 1, "b": "1"}}});
    let path = write_config(dir.path(), "iso.json", &v);
    assert_eq!(run_in(&dir, &["iso-check", "--config", &path]).0, 1);
    assert_eq!(run_in(&dir, &["iso-check", "--config", &path]).0, 1);
}

#[test]
fn thread_count_does_not_change_reports() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "d": 2, "alpha": ["1/2", "1/3"],
        "module": {"variant": "symmetric", "m": 2, "b": "2"},
        "window": {"N": 1}, "budget": {"R": 2, "T": 8},
    });
    let path = write_config(dir.path(), "s.json", &cfg);
    let mut texts = Vec::new();
    for threads in ["1", "8"] {
        let out = dir.path().join(format!("t{threads}.json"));
        let code = run_command([
            "wittmod", "cyclic", "--config", &path, "--no-cache", "--threads", threads, "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        texts.push(strip_timing(&fs::read_to_string(out).unwrap()).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn binary_honours_cache_env_and_stdout() {
    let dir = TempDir::new().unwrap();
    let cache = dir.path().join("envcache");
    let out = Process::new(env!("CARGO_BIN_EXE_wittmod"))
        .args(["verify-gl", "--config-json", &ext21().to_string()])
        .env("WITT_CACHE_DIR", &cache)
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["outcome"], "pass");
    assert_eq!(fs::read_dir(&cache).unwrap().count(), 1);
    assert!(!dir.path().join(".wittcache").exists());

    let out = Process::new(env!("CARGO_BIN_EXE_wittmod")).arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn replay_and_classify_run() {
    let dir = TempDir::new().unwrap();
    let path = write_config(dir.path(), "e.json", &ext21());
    let (code, report) = run_in(&dir, &["replay-claims", "--config", &path]);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["claim1_checked"], 9 * 2 * 2);
    let (code, report) = run_in(&dir, &["classify", "--config", &path]);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["operators"][0], json!({"i": 1, "j": 2, "class": "nilpotent", "index": 2}));
}

#[test]
fn closure_reports_window_dims() {
    let dir = TempDir::new().unwrap();
    let mut cfg = ext21();
    cfg["module"]["b"] = json!("0");
    cfg["budget"] = json!({"R": 1, "T": 2});
    cfg["window"] = json!({"N": 0});
    cfg["options"] = json!({"generators": [[{"n": [0, 0], "key": [1]}]]});
    let path = write_config(dir.path(), "cl.json", &cfg);
    let (code, report) = run_in(&dir, &["closure", "--config", &path]);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["weights"], json!([{"weight": [0, 0], "dim": 2}]));
}
