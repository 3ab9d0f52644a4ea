//! Presets with exact answers: swap-sequence symmetry, the wall/barrier
//! identity on the finite chain, and the reference distributions.

use std::path::Path;

use serde_json::json;

use super::{linspace, num, row, COLORS};
use crate::clock::ClockField;
use crate::colored::{audit_exhaustive, audit_random, evolve_colored, ColoredConfig, SwapAction, WallMode, WallRule};
use crate::error::Result;
use crate::experiment::plot::{Chart, Mark, Series};
use crate::experiment::{Contract, Outcome, Params, Runner};
use crate::oracle::{admissible_levels, staircase_family, verify_wall_identity, ColoredChain, IdentityReport};
use crate::refdist::{Law, Quadrature};
use crate::wall::WallProfile;

pub(super) fn symmetry_audit(p: &Params, runner: &Runner) -> Result<Outcome> {
    let width = p.count("exhaustive_width")? as usize;
    let len = p.count("exhaustive_len")? as usize;
    let window = p.count("window")? as usize;
    let sequences = p.count("sequences")?;
    let maxlen = p.count("maxlen")? as usize;
    let chunk = p.count("chunk")?.max(1);
    p.require("exhaustive_width", width >= 2, "need at least two sites")?;
    p.require("window", window >= 2, "need at least two sites")?;
    p.require("maxlen", maxlen >= 1, "must be >= 1")?;

    let exhaustive = audit_exhaustive(width, len);
    let chunks = sequences.div_ceil(chunk);
    let parts = runner.replicas("random-sequences", chunks, |i, seed| {
        let count = chunk.min(sequences - i as u64 * chunk);
        Ok(audit_random(window, count, maxlen, seed))
    })?;
    let random_checked: u64 = parts.iter().map(|a| a.checked).sum();
    let random_violations: u64 = parts.iter().map(|a| a.violations).sum();

    // exact time inversion on a small window, both wall rules
    let sites = p.count("chain_sites")? as i64;
    let horizon = p.f64("chain_T")?;
    let chain = ColoredChain::new(0, sites - 1, crate::oracle::DEFAULT_CAPACITY)?;
    let wall = WallProfile::staircase(0.0, vec![(0.0, 1.0), (0.4 * horizon, 2.0)])?;
    let gap_floor = chain.inversion_gap(&wall, WallRule::Floor, horizon)?;
    let gap_ceil = chain.inversion_gap(&wall, WallRule::Ceil, horizon)?;

    // one logged colored run
    let log_sites = p.count("log_sites")? as i64;
    let log_t = p.f64("log_T")?;
    let seed = runner.stream("colored-log", 1)[0];
    let clocks = ClockField::new(seed, 0, log_sites - 1)?;
    let log_wall = WallProfile::affine(log_sites as f64 / 2.0, 0.5)?;
    let traj = evolve_colored(
        &ColoredConfig::identity(0, log_sites - 1),
        &clocks,
        0.0,
        log_t,
        WallMode::Forward(&log_wall),
        WallRule::Floor,
    )?;
    let mut jsonl = Vec::new();
    traj.write_jsonl(&mut jsonl)?;

    let mut out = Outcome {
        header: row(["check", "width", "max_len", "checked", "violations"]),
        ..Default::default()
    };
    out.rows.push(row(["exhaustive".to_string(), width.to_string(), len.to_string(), exhaustive.checked.to_string(), exhaustive.violations.to_string()]));
    out.rows.push(row(["random".to_string(), window.to_string(), maxlen.to_string(), random_checked.to_string(), random_violations.to_string()]));
    out.contracts.push(Contract::new(
        "exhaustive-symmetry",
        exhaustive.violations == 0,
        format!("violations: {} of {} sequences", exhaustive.violations, exhaustive.checked),
    ));
    out.contracts.push(Contract::new(
        "random-symmetry",
        random_violations == 0,
        format!("violations: {random_violations} of {random_checked} sequences"),
    ));
    out.contracts.push(Contract::new(
        "time-inversion",
        gap_floor < 1e-12 && gap_ceil < 1e-12,
        format!("max gap floor rule {gap_floor:.3e}, ceil rule {gap_ceil:.3e}"),
    ));
    out.details = json!({
        "exhaustive": exhaustive,
        "random": {"checked": random_checked, "violations": random_violations, "window": window, "maxlen": maxlen},
        "inversion_gap": {"floor": gap_floor, "ceil": gap_ceil, "sites": sites, "T": horizon},
    });
    let mut swaps = Vec::new();
    let mut blocked = Vec::new();
    for e in &traj.log {
        match e.action {
            SwapAction::Swap => swaps.push((e.z as f64 + 0.5, e.t)),
            _ => blocked.push((e.z as f64 + 0.5, e.t)),
        }
    }
    let chart = Chart::new("Colored run: swap events", "bond z|z+1", "time")
        .with(Series::new("swap", COLORS[0], swaps, Mark::Dots))
        .with(Series::new("no swap", COLORS[1], blocked, Mark::Dots));
    out.plots.push(("colored-events".into(), chart.render()));
    out.files.push(("colored.jsonl".into(), jsonl));
    Ok(out)
}

pub(super) fn oracle_verify(p: &Params, runner: &Runner) -> Result<Outcome> {
    let ns = p.count_list("n")?;
    let horizons = p.f64_list("T")?;
    let count = p.count("count")? as usize;
    let tol = p.f64("tol")?;
    let relaxed = p.bool("relaxed")?;
    let capacity = p.count("capacity")? as usize;
    let walls_spec = p.str("walls")?;
    p.require("n", ns.iter().all(|&n| n >= 1), "labels must be >= 1")?;
    p.require("T", horizons.iter().all(|&t| t > 0.0), "horizons must be positive")?;

    let family_seed = runner.stream("staircase-family", 1)[0];
    let mut jobs = Vec::new();
    for &t in &horizons {
        let walls = if walls_spec == "staircase-family" {
            staircase_family(count, t, 0.0, family_seed)
        } else {
            vec![WallProfile::from_csv(Path::new(&walls_spec))?]
        };
        for &n in &ns {
            for (k, w) in walls.iter().enumerate() {
                jobs.push((n as usize, t, k, w.clone()));
            }
        }
    }
    let results = runner.map(&jobs, |(n, t, _, w)| {
        verify_wall_identity(*n, w, *t, &admissible_levels(*n, w, *t), relaxed, capacity)
    })?;

    let mut out = Outcome {
        header: row(["n", "T", "wall", "s", "lhs", "rhs", "diff", "truncation_mass"]),
        ..Default::default()
    };
    let mut all: Vec<&IdentityReport> = Vec::new();
    let mut points = Vec::new();
    for ((n, t, k, _), reps) in jobs.iter().zip(&results) {
        for r in reps {
            out.rows.push(row([n.to_string(), num(*t), k.to_string(), r.s.to_string(), num(r.lhs), num(r.rhs), num(r.diff), num(r.truncation_mass)]));
            points.push((all.len() as f64, (r.diff.max(1e-18)).log10()));
            all.push(r);
        }
    }
    let max_diff = all.iter().map(|r| r.diff).fold(0.0, f64::max);
    let max_trunc = all.iter().map(|r| r.truncation_mass).fold(0.0, f64::max);
    let walls_per = if walls_spec == "staircase-family" { count } else { 1 };
    out.contracts.push(Contract::new(
        "identity",
        max_diff <= tol && !all.is_empty(),
        format!("max |lhs - rhs| = {max_diff:.3e} over {} cases (tol {tol:.1e})", all.len()),
    ));
    out.details = json!({
        "cases": all.len(),
        "walls_per_horizon": walls_per,
        "max_diff": max_diff,
        "max_truncation_mass": max_trunc,
    });
    let mut bytes = serde_json::to_vec_pretty(&all)?;
    bytes.push(b'\n');
    out.files.push(("oracle.json".into(), bytes));
    let chart = Chart::new("Wall vs barrier identity", "case", "log10 |lhs - rhs|")
        .with(Series::new("difference (floored at 1e-18)", COLORS[0], points, Mark::Dots))
        .with(Series::new(
            "tolerance",
            COLORS[1],
            vec![(0.0, tol.log10()), (all.len().max(1) as f64, tol.log10())],
            Mark::Dashed,
        ));
    out.plots.push(("identity".into(), chart.render()));
    Ok(out)
}

/// Published moments: (mean, variance) of the GUE and GOE laws.
pub const TW2_MOMENTS: (f64, f64) = (-1.771_086_807_4, 0.813_194_792_8);
pub const TW1_MOMENTS: (f64, f64) = (-1.206_533_574_5, 1.607_781_034_5);

pub(super) fn refdist_eval(p: &Params, runner: &Runner) -> Result<Outcome> {
    let (lo, hi, step) = (p.f64("s_min")?, p.f64("s_max")?, p.f64("step")?);
    let m = p.count("nodes")? as usize;
    let ctol = p.f64("consistency_tol")?;
    let mtol = p.f64("moment_tol")?;
    p.require("step", step > 0.0, "must be positive")?;
    p.require("s_max", hi >= lo, "must be >= s_min")?;
    p.require("nodes", m >= 4, "need at least 4 nodes")?;
    let grid = linspace(lo, hi, ((hi - lo) / step).round() as usize);
    let q = Quadrature::new(m);
    let q2 = Quadrature::new(2 * m);
    let scale = 2f64.powf(2.0 / 3.0);
    let vals = runner.map(&grid, |&s| {
        Ok([
            q.cdf_or_limit(Law::Tw1, s),
            q.cdf_or_limit(Law::Tw2, s),
            q.cdf_or_limit(Law::Tw1, scale * s),
            q2.cdf_or_limit(Law::Tw1, s),
            q2.cdf_or_limit(Law::Tw2, s),
        ])
    })?;
    let (mean2, var2) = q.moments(Law::Tw2);
    let (mean1, var1) = q.moments(Law::Tw1);

    let mut out = Outcome {
        header: row(["s", "tw1", "tw2", "tw1_scaled", "tw1_doubled_nodes", "tw2_doubled_nodes"]),
        ..Default::default()
    };
    let mut consistency: f64 = 0.0;
    let mut order_violations = Vec::new();
    for (&s, v) in grid.iter().zip(&vals) {
        out.rows.push(row([num(s), num(v[0]), num(v[1]), num(v[2]), num(v[3]), num(v[4])]));
        consistency = consistency.max((v[0] - v[3]).abs()).max((v[1] - v[4]).abs());
        if v[2] > v[1] {
            order_violations.push(s);
        }
    }
    let dm = [
        (mean2 - TW2_MOMENTS.0).abs(),
        (var2 - TW2_MOMENTS.1).abs(),
        (mean1 - TW1_MOMENTS.0).abs(),
        (var1 - TW1_MOMENTS.1).abs(),
    ];
    let worst = dm.iter().copied().fold(0.0, f64::max);
    out.contracts.push(Contract::new(
        "self-consistency",
        consistency < ctol,
        format!("max |F(m) - F(2m)| = {consistency:.3e} with m = {m} on {} points", grid.len()),
    ));
    out.contracts.push(Contract::new(
        "moments",
        worst <= mtol,
        format!("tw2 ({mean2:.7}, {var2:.7}), tw1 ({mean1:.7}, {var1:.7}); worst deviation {worst:.2e}"),
    ));
    out.contracts.push(Contract::new(
        "ordering",
        order_violations.is_empty(),
        format!("F1(2^(2/3) s) <= F2(s) fails at {} grid points", order_violations.len()),
    ));
    out.details = json!({
        "nodes": m,
        "tw2": {"mean": mean2, "variance": var2},
        "tw1": {"mean": mean1, "variance": var1},
        "max_consistency_gap": consistency,
        "ordering_violations": order_violations,
    });
    let curve = |k: usize| grid.iter().zip(&vals).map(|(&s, v)| (s, v[k])).collect::<Vec<_>>();
    let chart = Chart::new("Reference distributions", "s", "F(s)")
        .y_range(0.0, 1.0)
        .with(Series::new("F1(s)", COLORS[0], curve(0), Mark::Line))
        .with(Series::new("F2(s)", COLORS[1], curve(1), Mark::Line))
        .with(Series::new("F1(2^(2/3) s)", COLORS[2], curve(2), Mark::Dashed));
    out.plots.push(("cdfs".into(), chart.render()));
    Ok(out)
}
