//! Backwards-path identities, the left/right decomposition and the
//! comparison sandwich against stationary companions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use super::{linspace, num, row, COLORS};
use crate::backpath::{
    audit_identities, build_backwards, event_inclusion_check, first_label_at_or_left, last_label_at_or_right,
    min_decomposition, paths_ordered, sandwich_check, IdentityAudit,
};
use crate::clock::{split_seed, ClockField};
use crate::error::Result;
use crate::experiment::plot::{Chart, Mark, Series};
use crate::experiment::{Contract, Outcome, Params, Runner};
use crate::tasep::{evolve, window_for, ParticleConfig, Trajectory};

#[derive(Debug, Clone, Copy, Default, Serialize)]
struct PathAudit {
    identities: IdentityAudit,
    decompositions: u64,
    decomposition_failures: u64,
    ordering_checks: u64,
    ordering_failures: u64,
    terminal_failures: u64,
}

impl PathAudit {
    fn merge(&mut self, o: &PathAudit) {
        self.identities.merge(&o.identities);
        self.decompositions += o.decompositions;
        self.decomposition_failures += o.decomposition_failures;
        self.ordering_checks += o.ordering_checks;
        self.ordering_failures += o.ordering_failures;
        self.terminal_failures += o.terminal_failures;
    }

    fn violations(&self) -> u64 {
        self.identities.violations() + self.decomposition_failures + self.ordering_failures + self.terminal_failures
    }
}

fn run_on_clocks(cfg: &ParticleConfig, seed: u64, t: f64) -> Result<Trajectory> {
    let (lo, hi) = window_for(cfg, t);
    evolve(cfg, &ClockField::new(seed, lo, hi)?, 0.0, t)
}

fn audit_one(index: usize, seed: u64, n: usize, t: f64, rho: f64, resets: usize, others: usize) -> Result<(PathAudit, Trajectory)> {
    let step = index % 2 == 0;
    let cfg = if step {
        ParticleConfig::step(n)
    } else {
        // about n particles at density rho, straddling the origin
        let width = (n as f64 / rho).floor() as i64;
        ParticleConfig::bernoulli(rho, -(2 * width) / 3, width / 3, split_seed(seed, 1))?
    };
    let traj = run_on_clocks(&cfg, seed, t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, 2));
    let mut a = PathAudit::default();
    if cfg.is_empty() {
        return Ok((a, traj));
    }
    let pick = |rng: &mut ChaCha8Rng| cfg.first_label() + rng.gen_range(0..cfg.len() as i64);
    let label = pick(&mut rng);
    let mut taus: Vec<f64> = (0..resets).map(|_| rng.gen_range(0.0..t)).collect();
    taus.extend([0.0, t]);
    let companions: Vec<i64> = (0..others).map(|_| pick(&mut rng)).collect();
    a.identities = audit_identities(&traj, label, t, &taus, &companions)?;

    let d = min_decomposition(&traj, label, t)?;
    a.decompositions += 1;
    if !(d.min_holds() && d.branch_holds() && d.inclusion_holds()) {
        a.decomposition_failures += 1;
    }
    let u = rng.gen_range(0.0..t);
    a.ordering_checks += 1;
    if !paths_ordered(&traj, label, u, t)? {
        a.ordering_failures += 1;
    }
    if step {
        let path = build_backwards(&traj, label, t)?;
        if path.end_position(&traj) != -path.end_label() + 1 {
            a.terminal_failures += 1;
        }
    }
    Ok((a, traj))
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
struct SandwichTally {
    kappa: f64,
    rho_plus: f64,
    rho_minus: f64,
    runs: u64,
    lower_events: u64,
    upper_events: u64,
    joint_events: u64,
    pairs_checked: u64,
    violations: u64,
    runs_with_violations: u64,
    outer_violations: u64,
    inclusion_failures: u64,
    /// (seed, t1, t2, increments lower/x/upper) of the first violating run.
    example: Option<(u64, f64, f64, [i64; 3])>,
}

struct SandwichSetup {
    horizon: f64,
    label: i64,
    start: f64,
    rho0: f64,
    kappas: Vec<f64>,
    grid: Vec<f64>,
    pairs: usize,
    margin: i64,
}

fn densities(rho0: f64, kappa: f64, t: f64) -> (f64, f64) {
    let d = kappa * t.powf(-1.0 / 3.0);
    ((rho0 + d).clamp(0.01, 0.99), (rho0 - d).clamp(0.01, 0.99))
}

fn sandwich_one(seed: u64, s: &SandwichSetup) -> Result<Vec<SandwichTally>> {
    let big_t = s.horizon;
    let span = (big_t + s.margin as f64) as i64;
    let step = ParticleConfig::step(s.label as usize);
    let mut configs = Vec::new();
    let mut lo = window_for(&step, big_t).0;
    let mut hi = window_for(&step, big_t).1;
    for &k in &s.kappas {
        let (rp, rm) = densities(s.rho0, k, s.start);
        // same seed for every density: the Bernoulli fields are monotonically coupled
        let plus = ParticleConfig::bernoulli(rp, -span, span, split_seed(seed, 1))?;
        let minus = ParticleConfig::bernoulli(rm, -span, span, split_seed(seed, 1))?;
        for c in [&plus, &minus] {
            let (a, b) = window_for(c, big_t);
            lo = lo.min(a);
            hi = hi.max(b);
        }
        configs.push((k, rp, rm, plus, minus));
    }
    let clocks = ClockField::new(seed, lo, hi)?;
    let x = evolve(&step, &clocks, 0.0, big_t)?;
    let site = x.position(s.label, s.start);
    let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, 2));
    let pairs: Vec<(f64, f64)> = (0..s.pairs)
        .map(|_| {
            let a = rng.gen_range(s.start..big_t);
            let b = rng.gen_range(a..=big_t);
            (a, b)
        })
        .collect();
    let mut out = Vec::new();
    for (kappa, rp, rm, plus, minus) in configs {
        let mut tally = SandwichTally { kappa, rho_plus: rp, rho_minus: rm, runs: 1, ..Default::default() };
        let lower = evolve(&plus, &clocks, 0.0, big_t)?;
        let upper = evolve(&minus, &clocks, 0.0, big_t)?;
        let m = first_label_at_or_left(&lower, site, s.start);
        let p = last_label_at_or_right(&upper, site, s.start);
        if let (Some(m), Some(p)) = (m, p) {
            let r = sandwich_check(&x, &lower, &upper, s.label, m, p, s.start, big_t, &s.grid)?;
            tally.lower_events += r.lower_event as u64;
            tally.upper_events += r.upper_event as u64;
            tally.joint_events += r.joint() as u64;
            tally.pairs_checked += r.pairs;
            tally.violations += r.violations;
            tally.runs_with_violations += (r.violations > 0) as u64;
            tally.outer_violations += r.outer_violation as u64;
            tally.example = r.first_violation.map(|(a, b, d)| (seed, a, b, d));
            tally.inclusion_failures += event_inclusion_check(&x, &lower, s.label, m, s.start, big_t, &pairs)?;
        }
        out.push(tally);
    }
    Ok(out)
}

pub(super) fn backpath_audit(p: &Params, runner: &Runner) -> Result<Outcome> {
    let runs = p.count("runs")?;
    let t = p.f64("T")?;
    let n = p.count("N")? as usize;
    let rho = p.f64("rho")?;
    let resets = p.count("resets")? as usize;
    let others = p.count("others")? as usize;
    p.require("T", t > 0.0, "must be positive")?;
    p.require("N", n >= 1, "must be >= 1")?;
    p.require("rho", rho > 0.0 && rho < 1.0, "must lie in (0, 1)")?;

    let audits = runner.replicas("identities", runs, |i, seed| {
        let (a, traj) = audit_one(i, seed, n, t, rho, resets, others)?;
        let log = if i == 0 {
            let mut buf = Vec::new();
            traj.write_jsonl(&mut buf)?;
            Some(buf)
        } else {
            None
        };
        Ok((a, log))
    })?;
    let mut total = PathAudit::default();
    let mut log = Vec::new();
    for (a, l) in audits {
        total.merge(&a);
        if let Some(l) = l {
            log = l;
        }
    }

    let sandwich_runs = p.count("sandwich_runs")?;
    let big_t = p.f64("sandwich_T")?;
    let alpha = p.f64("alpha")?;
    let mut kappas = p.f64_list("kappa")?;
    kappas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let span = p.f64("span")?;
    let grid_n = p.count("grid")? as usize;
    p.require("alpha", alpha > 0.0 && alpha < 1.0, "must lie in (0, 1)")?;
    p.require("kappa", kappas.iter().all(|&k| k > 0.0), "must be positive")?;
    p.require("grid", grid_n >= 2, "need at least two grid points")?;
    let start = big_t - span * big_t.powf(2.0 / 3.0);
    p.require("span", start > 0.0, "start time T - span T^(2/3) must be positive")?;
    let label = (alpha * big_t).round().max(1.0) as i64;
    let setup = SandwichSetup {
        horizon: big_t,
        label,
        start,
        rho0: (label as f64 / start).sqrt(),
        kappas: kappas.clone(),
        grid: linspace(start, big_t, grid_n - 1),
        pairs: p.count("pairs")? as usize,
        margin: p.count("margin")? as i64,
    };
    let per_run = runner.replicas("sandwich", sandwich_runs, |_, seed| sandwich_one(seed, &setup))?;
    let mut tallies: Vec<SandwichTally> = kappas
        .iter()
        .map(|&k| {
            let (rp, rm) = densities(setup.rho0, k, start);
            SandwichTally { kappa: k, rho_plus: rp, rho_minus: rm, ..Default::default() }
        })
        .collect();
    for run in &per_run {
        for (acc, r) in tallies.iter_mut().zip(run) {
            acc.runs += r.runs;
            acc.lower_events += r.lower_events;
            acc.upper_events += r.upper_events;
            acc.joint_events += r.joint_events;
            acc.pairs_checked += r.pairs_checked;
            acc.violations += r.violations;
            acc.runs_with_violations += r.runs_with_violations;
            acc.outer_violations += r.outer_violations;
            acc.example = acc.example.or(r.example);
            acc.inclusion_failures += r.inclusion_failures;
        }
    }
    let prob = |s: &SandwichTally| s.joint_events as f64 / s.runs.max(1) as f64;
    let probs: Vec<f64> = tallies.iter().map(prob).collect();
    let monotone = probs.windows(2).all(|w| w[0] <= w[1]) && (probs.len() < 2 || probs[0] < *probs.last().unwrap() || probs[0] == 1.0);

    let mut out = Outcome {
        header: row(["section", "key", "value"]),
        ..Default::default()
    };
    let id = &total.identities;
    for (k, v) in [
        ("checks", id.checks),
        ("reset_violations", id.reset),
        ("other_start_violations", id.other_start),
        ("replay_bound_violations", id.replay_bound),
        ("irregular_paths", id.irregular),
        ("decompositions", total.decompositions),
        ("decomposition_failures", total.decomposition_failures),
        ("ordering_checks", total.ordering_checks),
        ("ordering_failures", total.ordering_failures),
        ("terminal_failures", total.terminal_failures),
    ] {
        out.rows.push(row(["identities".to_string(), k.to_string(), v.to_string()]));
    }
    for s in &tallies {
        let sec = format!("sandwich kappa={}", s.kappa);
        for (k, v) in [
            ("rho_plus", num(s.rho_plus)),
            ("rho_minus", num(s.rho_minus)),
            ("runs", s.runs.to_string()),
            ("lower_events", s.lower_events.to_string()),
            ("upper_events", s.upper_events.to_string()),
            ("joint_events", s.joint_events.to_string()),
            ("joint_probability", num(prob(s))),
            ("pairs_checked", s.pairs_checked.to_string()),
            ("violations", s.violations.to_string()),
            ("runs_with_violations", s.runs_with_violations.to_string()),
            ("outer_pair_violations", s.outer_violations.to_string()),
            ("inclusion_failures", s.inclusion_failures.to_string()),
        ] {
            out.rows.push(row([sec.clone(), k.to_string(), v]));
        }
    }
    out.contracts.push(Contract::new(
        "identities",
        total.violations() == 0 && runs > 0,
        format!(
            "{runs} trajectories, {} reset checks: reset {} other-start {} replay-bound {} irregular {}; decomposition failures {}; ordering failures {}",
            id.checks, id.reset, id.other_start, id.replay_bound, id.irregular, total.decomposition_failures, total.ordering_failures
        ),
    ));
    let violations: u64 = tallies.iter().map(|s| s.violations).sum();
    let pairs: u64 = tallies.iter().map(|s| s.pairs_checked).sum();
    let bad_runs: u64 = tallies.iter().map(|s| s.runs_with_violations).sum();
    let outer: u64 = tallies.iter().map(|s| s.outer_violations).sum();
    let joint: u64 = tallies.iter().map(|s| s.joint_events).sum();
    out.contracts.push(Contract::new(
        "sandwich",
        violations == 0,
        format!(
            "{violations} of {pairs} grid pairs violate the ordering; {bad_runs} of {joint} runs with both events; outer pair (t, T) violated in {outer} runs",
        ),
    ));
    let inclusion: u64 = tallies.iter().map(|s| s.inclusion_failures).sum();
    out.contracts.push(Contract::new("event-inclusion", inclusion == 0, format!("{inclusion} failures")));
    out.contracts.push(Contract::new(
        "joint-event-monotone",
        monotone,
        format!(
            "P(both events) = {}",
            tallies.iter().zip(&probs).map(|(s, p)| format!("{p:.3} at kappa={}", s.kappa)).collect::<Vec<_>>().join(", ")
        ),
    ));
    out.details = json!({
        "identities": total,
        "sandwich": {"T": big_t, "t": start, "label": label, "rho0": setup.rho0, "tallies": tallies},
    });
    out.files.push(("trajectory.jsonl".into(), log));
    let chart = Chart::new("Joint crossing events", "kappa", "P(both events)")
        .y_range(0.0, 1.0)
        .with(Series::new("empirical", COLORS[0], kappas.iter().copied().zip(probs.iter().copied()).collect(), Mark::Line))
        .with(Series::new("points", COLORS[0], kappas.iter().copied().zip(probs).collect(), Mark::Dots));
    out.plots.push(("joint-events".into(), chart.render()));
    Ok(out)
}
