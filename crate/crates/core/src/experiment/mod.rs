//! Scenario presets, layered configuration, replica scheduling and run
//! artifacts.
//!
//! Seeds: a run has a master seed `m`. Stream `k` of a preset (one per
//! independent sub-experiment, numbered in the order the preset declares
//! them) has base seed `b_k = split_seed(m, k)`, and replica `i` of that
//! stream uses `split_seed(b_k, i)`. Every replica's seed is listed in the
//! manifest.

pub mod plot;
pub mod presets;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::Value;

use crate::clock::split_seed;
use crate::error::{config_err, Error, Result};

pub use presets::{defaults, run, PRESETS};

/// Resolved parameters of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    scenario: String,
    values: BTreeMap<String, Value>,
}

fn parse_raw(raw: &str) -> Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.to_string())),
        Err(_) => Value::String(raw.to_string()),
    }
}

/// Bring `given` to the type of `default`, or explain why not.
fn coerce(default: &Value, given: Value) -> std::result::Result<Value, String> {
    match (default, given) {
        (Value::Float(_), Value::Integer(i)) => Ok(Value::Float(i as f64)),
        (Value::Float(_), Value::String(s)) if s == "inf" => Ok(Value::Float(f64::INFINITY)),
        (Value::Array(d), Value::Array(items)) => {
            let proto = d.first().cloned().unwrap_or(Value::Float(0.0));
            items.into_iter().map(|x| coerce(&proto, x)).collect::<std::result::Result<Vec<_>, _>>().map(Value::Array)
        }
        (Value::Array(d), Value::String(s)) => {
            let proto = d.first().cloned().unwrap_or(Value::Float(0.0));
            s.split(',')
                .map(|x| coerce(&proto, parse_raw(x.trim())))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(Value::Array)
        }
        (Value::Array(d), scalar) => {
            let proto = d.first().cloned().unwrap_or(Value::Float(0.0));
            Ok(Value::Array(vec![coerce(&proto, scalar)?]))
        }
        (Value::String(_), Value::String(s)) => Ok(Value::String(s)),
        (Value::String(_), other) => Ok(Value::String(other.to_string())),
        (d, g) if std::mem::discriminant(d) == std::mem::discriminant(&g) => Ok(g),
        (d, g) => Err(format!("expected {}, got {}", d.type_str(), g.type_str())),
    }
}

impl Params {
    /// Preset defaults.
    pub fn defaults(scenario: &str) -> Result<Self> {
        let values = defaults(scenario)?.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        Ok(Self { scenario: scenario.to_string(), values })
    }

    pub fn scenario(&self) -> &str {
        &self.scenario
    }

    pub fn values(&self) -> &BTreeMap<String, Value> {
        &self.values
    }

    fn path(&self, key: &str) -> String {
        format!("{}.{key}", self.scenario)
    }

    fn assign(&mut self, key: &str, given: Value, source: &str) -> Result<()> {
        let Some(default) = self.values.get(key) else {
            let known: Vec<&str> = self.values.keys().map(String::as_str).collect();
            return Err(config_err(&self.path(key), format!("unknown key ({source}); known keys: {}", known.join(", "))));
        };
        let v = coerce(default, given).map_err(|m| config_err(&self.path(key), format!("{m} ({source})")))?;
        self.values.insert(key.to_string(), v);
        Ok(())
    }

    /// Layer a flat TOML table over the current values. A table named after
    /// the scenario is read as well, so one file can configure several presets.
    pub fn apply_table(&mut self, table: &toml::Table, source: &str) -> Result<()> {
        for (k, v) in table {
            match v {
                Value::Table(sub) if k == &self.scenario => self.apply_table(sub, source)?,
                Value::Table(_) if PRESETS.contains(&k.as_str()) => {}
                _ => self.assign(k, v.clone(), source)?,
            }
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path)?;
        let table: toml::Table =
            toml::from_str(&text).map_err(|e| config_err(&path.display().to_string(), e.message().to_string()))?;
        self.apply_table(&table, &path.display().to_string())
    }

    /// Command-line override `key = raw`.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        self.assign(key, parse_raw(raw), "command line")
    }

    /// Defaults, then the file, then the overrides.
    pub fn resolve(scenario: &str, file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut p = Self::defaults(scenario)?;
        if let Some(f) = file {
            p.apply_file(f)?;
        }
        for (k, v) in overrides {
            p.set(k, v)?;
        }
        Ok(p)
    }

    fn get(&self, key: &str) -> Result<&Value> {
        self.values.get(key).ok_or_else(|| config_err(&self.path(key), "missing"))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        match self.get(key)? {
            Value::Float(x) => Ok(*x),
            Value::Integer(i) => Ok(*i as f64),
            v => Err(config_err(&self.path(key), format!("expected float, got {}", v.type_str()))),
        }
    }

    pub fn i64(&self, key: &str) -> Result<i64> {
        match self.get(key)? {
            Value::Integer(i) => Ok(*i),
            v => Err(config_err(&self.path(key), format!("expected integer, got {}", v.type_str()))),
        }
    }

    /// Non-negative integer.
    pub fn count(&self, key: &str) -> Result<u64> {
        let i = self.i64(key)?;
        u64::try_from(i).map_err(|_| config_err(&self.path(key), format!("must be >= 0, got {i}")))
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        match self.get(key)? {
            Value::Boolean(b) => Ok(*b),
            v => Err(config_err(&self.path(key), format!("expected boolean, got {}", v.type_str()))),
        }
    }

    pub fn str(&self, key: &str) -> Result<String> {
        match self.get(key)? {
            Value::String(s) => Ok(s.clone()),
            v => Ok(v.to_string()),
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        match self.get(key)? {
            Value::Array(a) => a
                .iter()
                .map(|v| match v {
                    Value::Float(x) => Ok(*x),
                    Value::Integer(i) => Ok(*i as f64),
                    v => Err(config_err(&self.path(key), format!("expected numbers, got {}", v.type_str()))),
                })
                .collect(),
            _ => Ok(vec![self.f64(key)?]),
        }
    }

    pub fn count_list(&self, key: &str) -> Result<Vec<u64>> {
        match self.get(key)? {
            Value::Array(a) => a
                .iter()
                .map(|v| match v {
                    Value::Integer(i) if *i >= 0 => Ok(*i as u64),
                    v => Err(config_err(&self.path(key), format!("expected non-negative integers, got {v}"))),
                })
                .collect(),
            _ => Ok(vec![self.count(key)?]),
        }
    }

    /// Error unless `ok`, reported at `key`.
    pub fn require(&self, key: &str, ok: bool, msg: &str) -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(config_err(&self.path(key), msg.to_string()))
        }
    }
}

/// Independent replica seeds of one sub-experiment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedStream {
    pub name: String,
    pub base: u64,
    pub seeds: Vec<u64>,
}

/// Worker pool plus seed bookkeeping for one run.
pub struct Runner {
    pool: rayon::ThreadPool,
    master: u64,
    streams: std::sync::Mutex<Vec<SeedStream>>,
}

impl Runner {
    /// `jobs = 0` uses all cores.
    pub fn new(jobs: usize, master: u64) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
        Ok(Self { pool, master, streams: Default::default() })
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// Register the next stream and return its replica seeds.
    pub fn stream(&self, name: &str, count: u64) -> Vec<u64> {
        let mut streams = self.streams.lock().unwrap();
        let base = split_seed(self.master, streams.len() as u64);
        let seeds: Vec<u64> = (0..count).map(|i| split_seed(base, i)).collect();
        streams.push(SeedStream { name: name.to_string(), base, seeds: seeds.clone() });
        seeds
    }

    /// Run `f(index, seed)` for every replica of a new stream; results come
    /// back in replica order whatever the scheduling.
    pub fn replicas<T, F>(&self, name: &str, count: u64, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize, u64) -> Result<T> + Sync,
    {
        let seeds = self.stream(name, count);
        self.pool.install(|| seeds.par_iter().enumerate().map(|(i, &s)| f(i, s)).collect())
    }

    /// Parallel map over arbitrary work items, in order.
    pub fn map<I, T, F>(&self, items: &[I], f: F) -> Result<Vec<T>>
    where
        I: Sync,
        T: Send,
        F: Fn(&I) -> Result<T> + Sync,
    {
        self.pool.install(|| items.par_iter().map(&f).collect())
    }

    pub fn take_streams(&self) -> Vec<SeedStream> {
        std::mem::take(&mut self.streams.lock().unwrap())
    }
}

/// One asserted property of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contract {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Contract {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass, detail: detail.into() }
    }
}

/// Everything a scenario produces before it is written to disk.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub scenario: String,
    pub contracts: Vec<Contract>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub details: serde_json::Value,
    pub plots: Vec<(String, String)>,
    /// Extra artifacts such as JSONL logs, by file name.
    pub files: Vec<(String, Vec<u8>)>,
    pub streams: Vec<SeedStream>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.contracts.iter().all(|c| c.pass)
    }

    pub fn contract(&self, name: &str) -> Option<&Contract> {
        self.contracts.iter().find(|c| c.name == name)
    }

    pub fn summary(&self) -> String {
        let mut s = format!("scenario: {}\n", self.scenario);
        for c in &self.contracts {
            s.push_str(&format!("{} {}: {}\n", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail));
        }
        s.push_str(&format!("overall: {}\n", if self.passed() { "PASS" } else { "FAIL" }));
        s
    }

    fn csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }

    fn report(&self) -> Result<Vec<u8>> {
        let v = serde_json::json!({
            "scenario": self.scenario,
            "passed": self.passed(),
            "contracts": self.contracts,
            "details": self.details,
        });
        let mut out = serde_json::to_vec_pretty(&v)?;
        out.push(b'\n');
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: String,
    pub version: String,
    pub params: Params,
    pub master_seed: u64,
    pub seed_rule: String,
    pub jobs: usize,
    pub streams: Vec<SeedStream>,
    /// sha256 of every other output file, by path relative to the run directory.
    pub digests: BTreeMap<String, String>,
    pub passed: bool,
}

pub const SEED_RULE: &str = "stream k: base = split_seed(master, k); replica i: split_seed(base, i); \
split_seed(m, i) = mix64(m ^ mix64(i + 0x9e3779b97f4a7c15)), mix64 = splitmix64 finalizer";

fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Run a scenario with resolved parameters.
pub fn execute(params: &Params, jobs: usize) -> Result<(Outcome, u64)> {
    let master = params.count("seed")?;
    let runner = Runner::new(jobs, master)?;
    let mut out = run(params, &runner)?;
    out.streams = runner.take_streams();
    Ok((out, master))
}

/// Write results.csv, report.json, summary.txt, plots and extra files, then
/// the manifest over all of them.
pub fn write_outputs(dir: &Path, params: &Params, out: &Outcome, master: u64, jobs: usize) -> Result<Manifest> {
    fs::create_dir_all(dir.join("plots"))?;
    let mut files: Vec<(PathBuf, Vec<u8>)> = vec![
        ("results.csv".into(), out.csv()?),
        ("report.json".into(), out.report()?),
        ("summary.txt".into(), out.summary().into_bytes()),
    ];
    for (name, svg) in &out.plots {
        files.push((Path::new("plots").join(format!("{name}.svg")), svg.clone().into_bytes()));
    }
    for (name, bytes) in &out.files {
        files.push((name.into(), bytes.clone()));
    }
    let mut digests = BTreeMap::new();
    for (rel, bytes) in &files {
        fs::write(dir.join(rel), bytes)?;
        digests.insert(rel.to_string_lossy().replace('\\', "/"), digest(bytes));
    }
    let manifest = Manifest {
        scenario: out.scenario.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        params: params.clone(),
        master_seed: master,
        seed_rule: SEED_RULE.to_string(),
        jobs,
        streams: out.streams.clone(),
        digests,
        passed: out.passed(),
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    fs::write(dir.join("manifest.json"), bytes)?;
    Ok(manifest)
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    Ok(serde_json::from_slice(&fs::read(path)?)?)
}

/// Files whose digest differs between two manifests.
pub fn digest_mismatches(expected: &Manifest, got: &Manifest) -> Vec<String> {
    let mut bad: Vec<String> = expected
        .digests
        .iter()
        .filter(|(k, v)| got.digests.get(*k) != Some(*v))
        .map(|(k, _)| k.clone())
        .collect();
    bad.extend(got.digests.keys().filter(|k| !expected.digests.contains_key(*k)).cloned());
    bad
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_is_cli_over_file_over_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("c.toml");
        fs::write(&f, "runs = 7\nc = 0.2\n[lln]\nT = 5.0\n").unwrap();
        let p = Params::resolve("second-class", Some(&f), &[("c".into(), "0.3".into())]).unwrap();
        assert_eq!(p.count("runs").unwrap(), 7);
        assert_eq!(p.f64("c").unwrap(), 0.3);
        assert_eq!(p.f64("v").unwrap(), 0.5);
    }

    #[test]
    fn errors_carry_field_paths() {
        let e = Params::resolve("second-class", None, &[("bogus".into(), "1".into())]).unwrap_err();
        assert!(e.to_string().contains("second-class.bogus"), "{e}");
        let e = Params::resolve("second-class", None, &[("runs".into(), "many".into())]).unwrap_err();
        assert!(e.to_string().contains("second-class.runs"), "{e}");
        assert!(Params::defaults("nope").is_err());
    }

    #[test]
    fn lists_accept_commas_and_arrays() {
        let mut p = Params::defaults("lln").unwrap();
        p.set("alphas", "0.1, 0.2").unwrap();
        assert_eq!(p.f64_list("alphas").unwrap(), vec![0.1, 0.2]);
        p.set("alphas", "[0.3]").unwrap();
        assert_eq!(p.f64_list("alphas").unwrap(), vec![0.3]);
        p.set("alphas", "0.4").unwrap();
        assert_eq!(p.f64_list("alphas").unwrap(), vec![0.4]);
        p.set("T", "100").unwrap();
        assert_eq!(p.f64("T").unwrap(), 100.0);
    }

    #[test]
    fn replicas_come_back_in_order() {
        let r = Runner::new(3, 9).unwrap();
        let out = r.replicas("a", 100, |i, s| Ok((i, s))).unwrap();
        let seeds = r.take_streams().remove(0).seeds;
        assert!(out.iter().enumerate().all(|(i, &(j, s))| i == j && s == seeds[i]));
        let r1 = Runner::new(1, 9).unwrap();
        assert_eq!(r1.replicas("a", 100, |i, s| Ok((i, s))).unwrap(), out);
    }
}
