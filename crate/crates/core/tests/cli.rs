use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tasep-wall"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

#[test]
fn list_names_every_preset() {
    let out = run(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for p in tasep_wall::experiment::PRESETS {
        assert!(text.contains(&format!("{p}:")), "{p} missing");
    }
}

#[test]
fn refdist_eval_prints_csv() {
    let out = run(&["refdist", "eval", "--law", "tw2", "--s", "-2:0:1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "s,value");
    assert_eq!(lines.len(), 4);
    let vals: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[0] < w[1]));
    // F2(-2) is about 0.4132
    assert!((vals[0] - 0.4132).abs() < 1e-3, "{vals:?}");

    let out = run(&["refdist", "eval", "--law", "tw1", "--s", "-1,0.5"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 3);

    let bad = run(&["refdist", "eval", "--law", "tw3", "--s", "0"]);
    assert!(!bad.status.success());
}

#[test]
fn run_writes_outputs_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sym");
    let out = run(&[
        "run",
        "symmetry-audit",
        "--out",
        out_dir.to_str().unwrap(),
        "--sequences",
        "300",
        "--maxlen=200",
        "--jobs",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["results.csv", "report.json", "summary.txt", "manifest.json", "colored.jsonl", "plots/colored-events.svg"] {
        assert!(out_dir.join(f).is_file(), "{f} missing");
    }
    let m = json(&out_dir.join("manifest.json"));
    assert_eq!(m["params"]["values"]["sequences"], 300);
    assert_eq!(m["params"]["values"]["maxlen"], 200);
    assert_eq!(m["jobs"], 2);
    assert_eq!(m["passed"], true);
    assert!(m["streams"].as_array().unwrap().iter().any(|s| s["name"] == "random-sequences"));

    let svg = fs::read_to_string(out_dir.join("plots/colored-events.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));

    let again = dir.path().join("again");
    let rep = run(&["replay", out_dir.join("manifest.json").to_str().unwrap(), "--out", again.to_str().unwrap(), "--jobs", "1"]);
    assert!(rep.status.success());
    assert!(String::from_utf8(rep.stdout).unwrap().contains("identical"));
    assert_eq!(fs::read(out_dir.join("results.csv")).unwrap(), fs::read(again.join("results.csv")).unwrap());
}

#[test]
fn config_file_then_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lln.toml");
    fs::write(&cfg, "[lln]\nseeds = 4\nT = 100.0\nalphas = [0.25]\ntol = 0.5\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&["run", "lln", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--T", "80"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = &json(&out_dir.join("manifest.json"))["params"]["values"];
    assert_eq!(v["seeds"], 4);
    assert_eq!(v["T"], 80.0);
    assert_eq!(v["tol"], 0.5);
    assert_eq!(v["alphas"], serde_json::json!([0.25]));
}

#[test]
fn failing_contract_and_bad_input_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // tolerance no run can meet
    let out = run(&["run", "lln", "--out", dir.path().to_str().unwrap(), "--seeds", "2", "--T", "50", "--alphas", "0.25", "--tol", "0"]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["run", "lln", "--out", dir.path().to_str().unwrap(), "--nonsense", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("nonsense"));

    let out = run(&["run", "no-such-preset"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn wall_csv_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "t,value\n0,1\n2,3\n1,4\n").unwrap();
    let out = run(&["run", "wall-mc", "--out", dir.path().join("o").to_str().unwrap(), "--wall_csv", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let good = dir.path().join("good.csv");
    fs::write(&good, "t,value\n0,0\n1,1\n1.5,2\n3,2\n").unwrap();
    let o = dir.path().join("oracle");
    let out = run(&["run", "oracle-verify", "--out", o.to_str().unwrap(), "--walls", good.to_str().unwrap(), "--n", "2", "--T", "1.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let reports = json(&o.join("oracle.json"));
    let first = &reports.as_array().unwrap()[0];
    for k in ["n", "wall", "s", "T", "lhs", "rhs", "diff", "truncation_mass"] {
        assert!(first.get(k).is_some(), "oracle report lacks {k}");
    }
}
