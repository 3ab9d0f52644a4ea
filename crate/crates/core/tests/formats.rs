use std::io::Write;

use tasep_wall::colored::{evolve_colored, ColoredConfig, WallMode, WallRule};
use tasep_wall::tasep::{evolve, window_for};
use tasep_wall::{ClockField, ParticleConfig, WallProfile};

fn lines(buf: &[u8]) -> Vec<serde_json::Map<String, serde_json::Value>> {
    std::str::from_utf8(buf)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap().as_object().unwrap().clone())
        .collect()
}

#[test]
fn trajectory_log_has_one_event_per_line() {
    let cfg = ParticleConfig::step(5);
    let (lo, hi) = window_for(&cfg, 4.0);
    let clocks = ClockField::new(3, lo, hi).unwrap();
    let tr = evolve(&cfg, &clocks, 0.0, 4.0).unwrap();
    let mut buf = Vec::new();
    tr.write_jsonl(&mut buf).unwrap();
    let rows = lines(&buf);
    assert!(!rows.is_empty());
    let mut last = 0.0;
    for r in &rows {
        let mut keys: Vec<&str> = r.keys().map(|k| k.as_str()).collect();
        keys.sort();
        assert_eq!(keys, ["kind", "label", "site", "t"]);
        let t = r["t"].as_f64().unwrap();
        assert!(t >= last);
        last = t;
        assert!(r["kind"].is_string());
    }
}

#[test]
fn colored_log_has_time_bond_and_action() {
    let clocks = ClockField::new(5, 0, 20).unwrap();
    let wall = WallProfile::affine(4.0, 0.5).unwrap();
    let tr = evolve_colored(&ColoredConfig::identity(0, 7), &clocks, 0.0, 3.0, WallMode::Forward(&wall), WallRule::Floor).unwrap();
    let mut buf = Vec::new();
    tr.write_jsonl(&mut buf).unwrap();
    let rows = lines(&buf);
    assert!(!rows.is_empty());
    for r in &rows {
        let mut keys: Vec<&str> = r.keys().map(|k| k.as_str()).collect();
        keys.sort();
        assert_eq!(keys, ["action", "t", "z"]);
        assert!(r["z"].is_i64());
    }
}

#[test]
fn wall_csv_times_must_increase() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        std::fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
        p
    };
    let ok = write("ok.csv", "t,value\n0,0\n1,1\n2.5,3\n");
    let w = WallProfile::from_csv(&ok).unwrap();
    assert_eq!(w.value(1.0), 1.0);

    let no_header = write("plain.csv", "0,2\n1,2\n");
    assert!(WallProfile::from_csv(&no_header).is_ok());

    for (name, body) in [
        ("repeat.csv", "t,value\n0,0\n1,1\n1,2\n"),
        ("back.csv", "t,value\n0,0\n2,1\n1,2\n"),
        ("text.csv", "t,value\n0,0\nx,1\n"),
        ("empty.csv", "t,value\n"),
    ] {
        assert!(WallProfile::from_csv(&write(name, body)).is_err(), "{name} accepted");
    }
}
