//! Scenario presets: defaults and dispatch.

mod exact;
mod paths;
mod sampling;

use toml::Value;

use super::plot::{ecdf_points, Chart, Mark, Series};
use super::{Outcome, Params, Runner};
use crate::error::{config_err, Result};
use crate::stats::Ecdf;

pub const PRESETS: [&str; 10] = [
    "symmetry-audit",
    "oracle-verify",
    "wall-mc",
    "backpath-audit",
    "lln",
    "burke",
    "linear-wall",
    "second-class",
    "tightness",
    "refdist-eval",
];

fn f(x: f64) -> Value {
    Value::Float(x)
}

fn int(x: i64) -> Value {
    Value::Integer(x)
}

fn floats(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| Value::Float(x)).collect())
}

fn ints(xs: &[i64]) -> Value {
    Value::Array(xs.iter().map(|&x| Value::Integer(x)).collect())
}

fn text(s: &str) -> Value {
    Value::String(s.to_string())
}

/// Default parameters of a preset. Every preset has a master `seed`.
pub fn defaults(scenario: &str) -> Result<Vec<(&'static str, Value)>> {
    let mut d = match scenario {
        "symmetry-audit" => vec![
            ("exhaustive_width", int(4)),
            ("exhaustive_len", int(4)),
            ("window", int(100)),
            ("sequences", int(10_000)),
            ("maxlen", int(1000)),
            ("chunk", int(500)),
            ("chain_sites", int(4)),
            ("chain_T", f(1.5)),
            ("log_sites", int(16)),
            ("log_T", f(6.0)),
        ],
        "oracle-verify" => vec![
            ("n", ints(&[1, 2, 3])),
            ("T", floats(&[1.0, 2.0, 3.0])),
            ("walls", text("staircase-family")),
            ("count", int(20)),
            ("tol", f(1e-9)),
            ("relaxed", Value::Boolean(false)),
            ("capacity", int(crate::oracle::DEFAULT_CAPACITY as i64)),
        ],
        "wall-mc" => vec![
            ("n", int(10)),
            ("T", f(50.0)),
            ("c", f(0.1)),
            ("v", f(0.5)),
            ("wall_csv", text("")),
            ("samples", int(100_000)),
            ("delta", f(0.01)),
        ],
        "backpath-audit" => vec![
            ("runs", int(1000)),
            ("T", f(100.0)),
            ("N", int(50)),
            ("rho", f(0.5)),
            ("resets", int(4)),
            ("others", int(6)),
            ("sandwich_runs", int(1000)),
            ("sandwich_T", f(500.0)),
            ("alpha", f(0.25)),
            ("kappa", floats(&[1.0, 2.0, 4.0])),
            ("span", f(1.0)),
            ("grid", int(32)),
            ("pairs", int(10)),
            ("margin", int(60)),
        ],
        "lln" => vec![("alphas", floats(&[0.09, 0.25, 0.49])), ("T", f(2000.0)), ("seeds", int(200)), ("tol", f(0.02))],
        "burke" => vec![
            ("rho", f(0.5)),
            ("T", f(200.0)),
            ("replicas", int(10_000)),
            ("margin", int(200)),
            ("mean_tol", f(0.01)),
            ("p_min", f(0.01)),
        ],
        "linear-wall" => vec![
            ("v", f(0.5)),
            ("c", f(0.05)),
            ("alpha_a", f(0.09)),
            ("alpha_b", f(0.25)),
            ("alpha_c", f(0.25)),
            ("T", f(2000.0)),
            ("T_small", f(500.0)),
            ("runs", int(10_000)),
            ("ks_max", f(0.08)),
            ("delta", f(0.01)),
            ("nodes", int(crate::refdist::DEFAULT_NODES as i64)),
        ],
        "second-class" => vec![
            ("v", f(0.5)),
            ("c", f(0.125)),
            ("T", f(1000.0)),
            ("runs", int(50_000)),
            ("window", f(0.05)),
            ("bins", int(10)),
            ("atom_tol", f(0.015)),
            ("p_min", f(0.01)),
            ("control_c", f(0.6)),
            ("control_runs", int(50_000)),
            ("delta", f(0.01)),
        ],
        "tightness" => vec![
            ("T", f(2000.0)),
            ("alpha", f(0.25)),
            ("runs", int(1000)),
            ("deltas", floats(&[0.4, 0.2, 0.1])),
            ("eps", f(0.5)),
            ("tau_max", f(0.5)),
            ("tau_step", f(0.05)),
        ],
        "refdist-eval" => vec![
            ("s_min", f(-8.0)),
            ("s_max", f(6.0)),
            ("step", f(0.25)),
            ("nodes", int(crate::refdist::DEFAULT_NODES as i64)),
            ("consistency_tol", f(1e-8)),
            ("moment_tol", f(1e-4)),
        ],
        other => return Err(config_err("scenario", format!("unknown preset `{other}`; one of {}", PRESETS.join(", ")))),
    };
    d.push(("seed", int(1)));
    Ok(d)
}

pub fn run(params: &Params, runner: &Runner) -> Result<Outcome> {
    let mut out = match params.scenario() {
        "symmetry-audit" => exact::symmetry_audit(params, runner),
        "oracle-verify" => exact::oracle_verify(params, runner),
        "refdist-eval" => exact::refdist_eval(params, runner),
        "backpath-audit" => paths::backpath_audit(params, runner),
        "wall-mc" => sampling::wall_mc(params, runner),
        "lln" => sampling::lln(params, runner),
        "burke" => sampling::burke(params, runner),
        "linear-wall" => sampling::linear_wall(params, runner),
        "second-class" => sampling::second_class(params, runner),
        "tightness" => sampling::tightness(params, runner),
        other => Err(config_err("scenario", format!("unknown preset `{other}`"))),
    }?;
    out.scenario = params.scenario().to_string();
    Ok(out)
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn row<I: IntoIterator<Item = S>, S: ToString>(items: I) -> Vec<String> {
    items.into_iter().map(|s| s.to_string()).collect()
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// ECDF overlaid with reference curves and an optional band around the first.
fn ecdf_chart(title: &str, x_label: &str, ecdf: &Ecdf, refs: &[(&str, Vec<(f64, f64)>)], band: Option<f64>) -> String {
    let mut chart = Chart::new(title, x_label, "P(X <= x)").y_range(0.0, 1.0);
    if let (Some(b), Some((_, pts))) = (band, refs.first()) {
        let lo: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x, (y - b).max(0.0))).collect();
        let hi: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x, (y + b).min(1.0))).collect();
        chart = chart.with(Series::new(format!("band +-{b:.4}"), "#999999", lo, Mark::Band { upper: hi }));
    }
    for (i, (name, pts)) in refs.iter().enumerate() {
        chart = chart.with(Series::new(*name, COLORS[(i + 1) % COLORS.len()], pts.clone(), Mark::Dashed));
    }
    chart.with(Series::new("empirical", COLORS[0], ecdf_points(ecdf.samples(), 400), Mark::Step)).render()
}

/// `count + 1` evenly spaced points on `[lo, hi]`.
fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..=count).map(|i| lo + (hi - lo) * i as f64 / count as f64).collect()
}
