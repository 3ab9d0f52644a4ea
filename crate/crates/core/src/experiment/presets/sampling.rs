//! Monte Carlo presets driven by particle clocks.

use std::collections::HashMap;
use std::path::Path;

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde_json::json;
use statrs::distribution::{DiscreteCDF, Poisson};

use super::{ecdf_chart, linspace, num, row, COLORS};
use crate::colored::second_class::{initial_colored, limit_law, sample_position};
use crate::colored::{evolve_colored, WallMode, WallRule};
use crate::clock::ClockField;
use crate::error::{Error, Result};
use crate::experiment::plot::{Chart, Mark, Series};
use crate::experiment::{Contract, Outcome, Params, Runner};
use crate::refdist::{Law, Quadrature};
use crate::stats::{dkw_band, ks_distance, ks_distance_discrete, ks_pvalue, ks_two_sample, mixture_test, modulus_of_continuity, Ecdf};
use crate::tasep::{sample_with, Constraint, ParticleConfig, GUARD};
use crate::wall::scaling::{classify_linear, LimitLaw, Scaling};
use crate::wall::{survival_threshold, WallProfile};

fn rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

pub(super) fn wall_mc(p: &Params, runner: &Runner) -> Result<Outcome> {
    let n = p.count("n")? as usize;
    let t = p.f64("T")?;
    let samples = p.count("samples")?;
    let delta = p.f64("delta")?;
    let csv = p.str("wall_csv")?;
    p.require("n", n >= 1, "must be >= 1")?;
    p.require("T", t > 0.0, "must be positive")?;
    p.require("samples", samples >= 1, "must be >= 1")?;
    p.require("delta", delta > 0.0 && delta < 1.0, "must lie in (0, 1)")?;
    let wall = if csv.is_empty() {
        let (c, v) = (p.f64("c")?, p.f64("v")?);
        p.require("c", c >= 0.0, "must be >= 0")?;
        p.require("v", v >= 0.0, "must be >= 0")?;
        WallProfile::linear(c, v, t)?
    } else {
        WallProfile::from_csv(Path::new(&csv))?
    };
    wall.check_start(false)?;
    let cfg = ParticleConfig::step(n);
    let label = n as i64;
    let walled = runner.replicas("wall-process", samples, |_, seed| {
        let tr = sample_with(&cfg, 0.0, t, Constraint::Wall(&wall), &mut rng(seed))?;
        Ok(tr.position(label, t) as f64)
    })?;
    let survival = runner.replicas("barrier-survival", samples, |_, seed| {
        let tr = sample_with(&cfg, 0.0, t, Constraint::Free, &mut rng(seed))?;
        Ok(survival_threshold(&tr, label, &wall, t) as f64)
    })?;
    let a = Ecdf::new(walled);
    let b = Ecdf::new(survival);
    let ks = ks_two_sample(&a, &b);
    let band = dkw_band(a.len(), delta) + dkw_band(b.len(), delta);

    let mut out = Outcome { header: row(["s", "wall_ecdf", "survival_ecdf"]), ..Default::default() };
    let lo = a.samples()[0].min(b.samples()[0]) as i64;
    let hi = a.samples()[a.len() - 1].max(b.samples()[b.len() - 1]) as i64;
    for s in lo..=hi {
        out.rows.push(row([s.to_string(), num(a.cdf(s as f64)), num(b.cdf(s as f64))]));
    }
    out.contracts.push(Contract::new(
        "two-sided-ks",
        ks <= band,
        format!("KS {ks:.5} vs two DKW bands {band:.5} ({} + {} samples)", a.len(), b.len()),
    ));
    out.details = json!({
        "wall": wall, "n": n, "T": t, "ks": ks, "band": band,
        "mean_wall": a.mean(), "mean_survival": b.mean(),
    });
    let pts = |e: &Ecdf| (lo..=hi).map(|s| (s as f64, e.cdf(s as f64))).collect::<Vec<_>>();
    let chart = Chart::new(format!("Label {n} at T = {t}: wall process vs barrier survival"), "s", "P(X <= s)")
        .y_range(0.0, 1.0)
        .with(Series::new("wall process", COLORS[0], pts(&a), Mark::Step))
        .with(Series::new("barrier survival", COLORS[1], pts(&b), Mark::Step));
    out.plots.push(("wall-vs-survival".into(), chart.render()));
    Ok(out)
}

pub(super) fn lln(p: &Params, runner: &Runner) -> Result<Outcome> {
    let alphas = p.f64_list("alphas")?;
    let t = p.f64("T")?;
    let seeds = p.count("seeds")?;
    let tol = p.f64("tol")?;
    p.require("alphas", alphas.iter().all(|&a| a > 0.0 && a < 1.0), "must lie in (0, 1)")?;
    p.require("T", t > 0.0, "must be positive")?;
    p.require("seeds", seeds >= 1, "must be >= 1")?;
    let mut out = Outcome { header: row(["alpha", "label", "mean_scaled", "limit", "error", "sd_scaled"]), ..Default::default() };
    let mut measured = Vec::new();
    let mut details = Vec::new();
    for &alpha in &alphas {
        let label = (alpha * t).round().max(1.0) as usize;
        let cfg = ParticleConfig::step(label);
        let xs = runner.replicas(&format!("alpha={alpha}"), seeds, |_, seed| {
            let tr = sample_with(&cfg, 0.0, t, Constraint::Free, &mut rng(seed))?;
            Ok(tr.position(label as i64, t) as f64 / t)
        })?;
        let e = Ecdf::new(xs);
        let limit = 1.0 - 2.0 * alpha.sqrt();
        let err = (e.mean() - limit).abs();
        let sd = if e.len() > 1 { e.variance().sqrt() } else { 0.0 };
        out.rows.push(row([num(alpha), label.to_string(), num(e.mean()), num(limit), num(err), num(sd)]));
        out.contracts.push(Contract::new(
            format!("alpha={alpha}"),
            err <= tol,
            format!("mean x/T = {:.5}, limit {limit:.5}, error {err:.5} (tol {tol})", e.mean()),
        ));
        measured.push((alpha, e.mean()));
        details.push(json!({"alpha": alpha, "label": label, "mean": e.mean(), "limit": limit, "sd": sd}));
    }
    out.details = json!({"T": t, "seeds": seeds, "points": details});
    let curve: Vec<(f64, f64)> = linspace(0.0, 1.0, 100).into_iter().map(|a| (a, 1.0 - 2.0 * a.sqrt())).collect();
    let chart = Chart::new(format!("Tagged position at T = {t}"), "alpha", "x_(alpha T)(T) / T")
        .with(Series::new("1 - 2 sqrt(alpha)", COLORS[1], curve, Mark::Line))
        .with(Series::new("sample mean", COLORS[0], measured, Mark::Dots));
    out.plots.push(("profile".into(), chart.render()));
    Ok(out)
}

pub(super) fn burke(p: &Params, runner: &Runner) -> Result<Outcome> {
    let rho = p.f64("rho")?;
    let t = p.f64("T")?;
    let replicas = p.count("replicas")?;
    let margin = p.count("margin")? as i64;
    let mean_tol = p.f64("mean_tol")?;
    let p_min = p.f64("p_min")?;
    p.require("rho", rho > 0.0 && rho < 1.0, "must lie in (0, 1)")?;
    p.require("T", t > 0.0, "must be positive")?;
    p.require("replicas", replicas >= 1, "must be >= 1")?;
    let hi = t.ceil() as i64 + margin;
    let counts = runner.replicas("replicas", replicas, |_, seed| {
        let mut r = rng(seed);
        let cfg = ParticleConfig::bernoulli(rho, 0, hi, crate::clock::split_seed(seed, 1))?;
        if cfg.is_empty() {
            return Err(Error::InvalidConfig("no particle in the stationary window".into()));
        }
        // leftmost particle: the one at or right of the origin
        let tagged = cfg.last_label();
        let tr = sample_with(&cfg, 0.0, t, Constraint::Free, &mut r)?;
        Ok(tr.jump_times(tagged).len() as f64)
    })?;
    let e = Ecdf::new(counts);
    let lambda = (1.0 - rho) * t;
    let pois = Poisson::new(lambda).map_err(|err| Error::Domain(err.to_string()))?;
    let cdf = |x: f64| pois.cdf(x.floor() as u64);
    let left = |x: f64| if x < 1.0 { 0.0 } else { pois.cdf(x.floor() as u64 - 1) };
    let d = ks_distance_discrete(&e, cdf, left);
    let pval = ks_pvalue(d, e.len());
    let rel = (e.mean() - lambda).abs() / lambda;

    let mut out = Outcome { header: row(["k", "ecdf", "poisson_cdf"]), ..Default::default() };
    let (lo, top) = (e.samples()[0] as u64, e.samples()[e.len() - 1] as u64);
    for k in lo..=top {
        out.rows.push(row([k.to_string(), num(e.cdf(k as f64)), num(pois.cdf(k))]));
    }
    out.contracts.push(Contract::new(
        "mean",
        rel <= mean_tol,
        format!("mean {:.4} vs {lambda} (relative error {rel:.5}, tol {mean_tol})", e.mean()),
    ));
    out.contracts.push(Contract::new("poisson-ks", pval > p_min, format!("KS {d:.5}, p-value {pval:.4} (min {p_min})")));
    out.details = json!({
        "rho": rho, "T": t, "replicas": replicas, "mean": e.mean(), "variance": e.variance(),
        "lambda": lambda, "ks": d, "p_value": pval,
    });
    let refc: Vec<(f64, f64)> = (lo..=top).map(|k| (k as f64, pois.cdf(k))).collect();
    out.plots.push((
        "tagged-counts".into(),
        ecdf_chart("Tagged particle jumps in stationarity", "jumps by time T", &e, &[("Poisson cdf", refc)], None),
    ));
    Ok(out)
}

/// Reference values at every distinct sample point, evaluated in parallel.
fn reference_table<F>(runner: &Runner, e: &Ecdf, f: F) -> Result<HashMap<u64, f64>>
where
    F: Fn(f64) -> f64 + Sync,
{
    let mut xs = e.samples().to_vec();
    xs.dedup();
    let vals = runner.map(&xs, |&x| Ok(f(x)))?;
    Ok(xs.into_iter().map(f64::to_bits).zip(vals).collect())
}

fn sample_rescaled(
    runner: &Runner,
    name: &str,
    v: f64,
    c: f64,
    alpha: f64,
    t: f64,
    runs: u64,
) -> Result<(Ecdf, crate::wall::scaling::LinearCase)> {
    let case = classify_linear(v, c, alpha)?;
    let wall = WallProfile::linear(c, v, t)?;
    let label = (alpha * t).round().max(1.0) as usize;
    let cfg = ParticleConfig::step(label);
    let scale = -case.c1 * t.powf(1.0 / 3.0);
    let xs = runner.replicas(name, runs, |_, seed| {
        let tr = sample_with(&cfg, 0.0, t, Constraint::Wall(&wall), &mut rng(seed))?;
        Ok((tr.position(label as i64, t) as f64 - case.xi * t) / scale)
    })?;
    Ok((Ecdf::new(xs), case))
}

pub(super) fn linear_wall(p: &Params, runner: &Runner) -> Result<Outcome> {
    let v = p.f64("v")?;
    let c = p.f64("c")?;
    let t = p.f64("T")?;
    let t_small = p.f64("T_small")?;
    let runs = p.count("runs")?;
    let ks_max = p.f64("ks_max")?;
    let delta = p.f64("delta")?;
    let q = Quadrature::new(p.count("nodes")? as usize);
    p.require("T_small", t_small > 0.0 && t_small < t, "must lie in (0, T)")?;
    p.require("runs", runs >= 1, "must be >= 1")?;
    let goe = |s: f64| q.cdf_or_limit(Law::Tw1, 2f64.powf(2.0 / 3.0) * s);
    let gue = |s: f64| q.cdf_or_limit(Law::Tw2, s);
    let band = dkw_band(runs as usize, delta);

    let mut out = Outcome { header: row(["case", "alpha", "c", "T", "runs", "statistic", "value"]), ..Default::default() };
    let mut details = serde_json::Map::new();
    for (tag, key) in [("a", "alpha_a"), ("c", "alpha_c")] {
        let alpha = p.f64(key)?;
        let mut ks = Vec::new();
        let mut last = None;
        for &h in &[t_small, t] {
            let (e, case) = sample_rescaled(runner, &format!("case {tag} T={h}"), v, c, alpha, h, runs)?;
            if case.case.to_string() != tag {
                return Err(crate::error::Error::Config {
                    path: format!("linear-wall.{key}"),
                    msg: format!("parameters give case ({}) instead of ({tag})", case.case),
                });
            }
            let table = match case.law {
                LimitLaw::Goe => reference_table(runner, &e, goe)?,
                _ => reference_table(runner, &e, gue)?,
            };
            let d = ks_distance(&e, |x| table[&x.to_bits()]);
            out.rows.push(row([tag.to_string(), num(alpha), num(c), num(h), runs.to_string(), "ks".into(), num(d)]));
            ks.push(d);
            last = Some((e, case));
        }
        let (e, case) = last.unwrap();
        let pass = ks[1] <= ks_max && ks[1] < ks[0];
        out.contracts.push(Contract::new(
            format!("case-{tag}"),
            pass,
            format!("KS {:.4} at T={t} (max {ks_max}), {:.4} at T={t_small}", ks[1], ks[0]),
        ));
        details.insert(
            format!("case_{tag}"),
            json!({"alpha": alpha, "xi": case.xi, "c1": case.c1, "law": case.law, "ks_small": ks[0], "ks": ks[1]}),
        );
        let (lo, hi) = (e.samples()[0].max(-6.0), e.samples()[e.len() - 1].min(4.0));
        let grid = linspace(lo, hi, 200);
        let (name, refc): (&str, Vec<(f64, f64)>) = match case.law {
            LimitLaw::Goe => ("F1(2^(2/3) s)", grid.iter().map(|&s| (s, goe(s))).collect()),
            _ => ("F2(s)", grid.iter().map(|&s| (s, gue(s))).collect()),
        };
        out.plots.push((
            format!("case-{tag}"),
            ecdf_chart(&format!("Case ({tag}): alpha = {alpha}, T = {t}"), "rescaled position", &e, &[(name, refc)], Some(band)),
        ));
    }

    // case (b): bracketed by the two laws
    let alpha = p.f64("alpha_b")?;
    let (e, case) = sample_rescaled(runner, "case b", v, 0.0, alpha, t, runs)?;
    if case.case != 'b' {
        return Err(crate::error::Error::Config {
            path: "linear-wall.alpha_b".into(),
            msg: format!("alpha_b must equal (1 - v)^2 for case (b); got case ({})", case.case),
        });
    }
    let lower = reference_table(runner, &e, goe)?;
    let upper = reference_table(runner, &e, gue)?;
    let mut worst_low: f64 = 0.0;
    let mut worst_high: f64 = 0.0;
    let n = e.len() as f64;
    let xs = e.samples();
    let mut i = 0;
    while i < xs.len() {
        let x = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == x {
            j += 1;
        }
        let (below, at) = (i as f64 / n, j as f64 / n);
        worst_low = worst_low.max(lower[&x.to_bits()] - below);
        worst_high = worst_high.max(at - upper[&x.to_bits()]);
        i = j;
    }
    out.rows.push(row(["b".into(), num(alpha), "0".into(), num(t), runs.to_string(), "excess_below_lower".into(), num(worst_low)]));
    out.rows.push(row(["b".into(), num(alpha), "0".into(), num(t), runs.to_string(), "excess_above_upper".into(), num(worst_high)]));
    out.contracts.push(Contract::new(
        "case-b",
        worst_low <= band && worst_high <= band,
        format!("largest excursion below F1(2^(2/3) s) {worst_low:.4}, above F2(s) {worst_high:.4} (band {band:.4})"),
    ));
    details.insert("case_b".into(), json!({"alpha": alpha, "xi": case.xi, "c1": case.c1, "below": worst_low, "above": worst_high, "band": band}));
    let (lo, hi) = (e.samples()[0].max(-6.0), e.samples()[e.len() - 1].min(4.0));
    let grid = linspace(lo, hi, 200);
    let chart = ecdf_chart(
        &format!("Case (b): alpha = {alpha}, T = {t}"),
        "rescaled position",
        &e,
        &[
            ("F1(2^(2/3) s)", grid.iter().map(|&s| (s, goe(s))).collect()),
            ("F2(s)", grid.iter().map(|&s| (s, gue(s))).collect()),
        ],
        None,
    );
    out.plots.push(("case-b".into(), chart));
    details.insert("band".into(), json!(band));
    out.details = serde_json::Value::Object(details);
    Ok(out)
}

pub(super) fn second_class(p: &Params, runner: &Runner) -> Result<Outcome> {
    let v = p.f64("v")?;
    let c = p.f64("c")?;
    let t = p.f64("T")?;
    let runs = p.count("runs")?;
    let window = p.f64("window")?;
    let bins = p.count("bins")? as usize;
    let atom_tol = p.f64("atom_tol")?;
    let p_min = p.f64("p_min")?;
    let control_c = p.f64("control_c")?;
    let control_runs = p.count("control_runs")?;
    let delta = p.f64("delta")?;
    p.require("T", t > 0.0, "must be positive")?;
    p.require("window", window > 0.0, "must be positive")?;
    p.require("bins", bins >= 2, "need at least two bins")?;
    let law = limit_law(v, c).map_err(|e| crate::error::Error::Config { path: "second-class.c".into(), msg: e.to_string() })?;
    let xs = runner.replicas("main", runs, |_, seed| Ok(sample_position(v, c, t, &mut rng(seed))? as f64 / t))?;
    let report = mixture_test(&xs, &law, window, bins)?;
    let control_law = limit_law(v, control_c)?;
    let ys = runner.replicas("control", control_runs, |_, seed| Ok(sample_position(v, control_c, t, &mut rng(seed))? as f64 / t))?;
    let ce = Ecdf::new(ys);
    let cks = ks_distance(&ce, |x| control_law.cdf(x));
    let cband = dkw_band(ce.len(), delta);

    let mut out = Outcome { header: row(["bin_left", "bin_right", "density", "limit_density"]), ..Default::default() };
    let width: f64 = 0.02;
    let nb = (2.0 / width).round() as usize;
    let mut hist = vec![0u64; nb];
    for &x in &xs {
        let k = (((x + 1.0) / width).floor() as i64).clamp(0, nb as i64 - 1) as usize;
        hist[k] += 1;
    }
    let mut bars = Vec::new();
    for (k, &h) in hist.iter().enumerate() {
        let a = -1.0 + k as f64 * width;
        let dens = h as f64 / (xs.len() as f64 * width);
        let mid = a + width / 2.0;
        let lim = if mid < law.right { 0.5 } else { 0.0 };
        out.rows.push(row([num(a), num(a + width), num(dens), num(lim)]));
        bars.push((mid, dens));
    }
    out.contracts.push(Contract::new(
        "atom",
        (report.atom_estimate - law.atom).abs() <= atom_tol,
        format!(
            "atom estimate {:.4} at {:.3} (limit {:.4}, tol {atom_tol}, window {window})",
            report.atom_estimate, law.right, law.atom
        ),
    ));
    out.contracts.push(Contract::new(
        "uniform-part",
        report.p_value > p_min,
        format!("chi-square {:.3} on {bins} bins, p-value {:.4} (min {p_min})", report.chi_square, report.p_value),
    ));
    out.contracts.push(Contract::new(
        "control",
        cks <= cband,
        format!("c = {control_c}: KS to the limit law {cks:.5} vs DKW band {cband:.5}"),
    ));
    out.details = json!({
        "v": v, "c": c, "T": t, "runs": runs, "law": law, "mixture": report,
        "control": {"c": control_c, "law": control_law, "runs": control_runs, "ks": cks, "band": cband},
    });
    let limit_line = vec![(-1.0, 0.5), (law.right, 0.5)];
    let mut chart = Chart::new(format!("Second-class position / T (v = {v}, c = {c}, T = {t})"), "position / T", "density")
        .x_range(-1.0, 1.0)
        .with(Series::new("empirical", COLORS[0], bars, Mark::Bars { width }))
        .with(Series::new("uniform part of limit", COLORS[1], limit_line, Mark::Line));
    if law.atom > 0.0 {
        chart = chart.with(Series::new(
            format!("atom {:.3} (as density over one bin)", law.atom),
            COLORS[2],
            vec![(law.right, law.atom / width)],
            Mark::Bars { width: width / 2.0 },
        ));
    }
    out.plots.push(("second-class".into(), chart.render()));
    let grid = linspace(-1.0, 1.0, 100);
    out.plots.push((
        "control".into(),
        ecdf_chart(
            &format!("Control c = {control_c}"),
            "position / T",
            &ce,
            &[("limit law", grid.iter().map(|&x| (x, control_law.cdf(x))).collect())],
            Some(cband),
        ),
    ));

    // one logged colored run of the same system on a small window
    let seed = runner.stream("colored-log", 1)[0];
    let (lo, hi, h) = (-12, 12, 8.0);
    let clocks = ClockField::new(seed, lo, hi + GUARD)?;
    let wall = if law.atom > 0.0 { WallProfile::affine(c * h, v)? } else { WallProfile::unbounded() };
    let ct = evolve_colored(&initial_colored(lo, hi), &clocks, 0.0, h, WallMode::Forward(&wall), WallRule::Floor)?;
    let mut buf = Vec::new();
    ct.write_jsonl(&mut buf)?;
    out.files.push(("colored.jsonl".into(), buf));
    Ok(out)
}

pub(super) fn tightness(p: &Params, runner: &Runner) -> Result<Outcome> {
    let t = p.f64("T")?;
    let alpha = p.f64("alpha")?;
    let runs = p.count("runs")?;
    let mut deltas = p.f64_list("deltas")?;
    deltas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let eps = p.f64("eps")?;
    let tau_max = p.f64("tau_max")?;
    let step = p.f64("tau_step")?;
    let scaling = Scaling::new(alpha, 1.0)?;
    p.require("tau_step", step > 0.0 && deltas.iter().all(|&d| step <= d + 1e-12), "must be positive and <= every delta")?;
    p.require("tau_max", tau_max > 0.0 && scaling.time(tau_max, t) > 0.0, "earliest time must be positive")?;
    let taus = linspace(0.0, tau_max, (tau_max / step).round() as usize);
    let times: Vec<f64> = taus.iter().map(|&tau| scaling.time(tau, t)).collect();
    let label = (alpha * t).round().max(1.0) as usize;
    let cfg = ParticleConfig::step(label);
    let moduli = runner.replicas("paths", runs, |_, seed| {
        let tr = sample_with(&cfg, 0.0, t, Constraint::Free, &mut rng(seed))?;
        let path: Vec<f64> = taus
            .iter()
            .zip(&times)
            .map(|(&tau, &u)| scaling.rescale(tr.position(label as i64, u) as f64, tau, t))
            .collect();
        Ok(deltas.iter().map(|&d| modulus_of_continuity(&taus, &path, d)).collect::<Vec<f64>>())
    })?;
    let probs: Vec<f64> = (0..deltas.len())
        .map(|k| moduli.iter().filter(|m| m[k] >= eps).count() as f64 / runs.max(1) as f64)
        .collect();
    let mut out = Outcome { header: row(["delta", "p_modulus_at_least_eps", "mean_modulus"]), ..Default::default() };
    for (k, &d) in deltas.iter().enumerate() {
        let mean = moduli.iter().map(|m| m[k]).sum::<f64>() / runs.max(1) as f64;
        out.rows.push(row([num(d), num(probs[k]), num(mean)]));
    }
    let monotone = probs.windows(2).all(|w| w[1] <= w[0]);
    out.contracts.push(Contract::new(
        "monotone",
        monotone,
        deltas.iter().zip(&probs).map(|(d, q)| format!("P(w({d}) >= {eps}) = {q:.4}")).collect::<Vec<_>>().join(", "),
    ));
    out.details = json!({"T": t, "alpha": alpha, "runs": runs, "deltas": deltas, "probabilities": probs, "tau_grid": taus.len()});
    let chart = Chart::new(format!("Modulus of continuity, T = {t}"), "delta", format!("P(w(delta) >= {eps})"))
        .y_range(0.0, 1.0)
        .with(Series::new("empirical", COLORS[0], deltas.iter().copied().zip(probs.iter().copied()).collect(), Mark::Line))
        .with(Series::new("points", COLORS[0], deltas.iter().copied().zip(probs).collect(), Mark::Dots));
    out.plots.push(("modulus".into(), chart.render()));
    Ok(out)
}
