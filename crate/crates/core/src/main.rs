use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tasep_wall::experiment::{self, digest_mismatches, read_manifest, Params, PRESETS};
use tasep_wall::refdist::{Law, Quadrature};
use tasep_wall::{Error, Result};

#[derive(Parser)]
#[command(name = "tasep-wall", version, about = "TASEP with a moving wall: experiments and reference laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset. Any preset key can be overridden with `--key value`.
    Run {
        preset: String,
        /// TOML file with preset keys (flat, or under a table named after the preset).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory [default: out/<preset>].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
        overrides: Vec<String>,
    },
    /// Re-run a manifest and compare output digests.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// List presets and their defaults.
    List,
    /// Reference distributions.
    Refdist {
        #[command(subcommand)]
        command: RefdistCommand,
    },
}

#[derive(Subcommand)]
enum RefdistCommand {
    /// Print `s,value` rows of a distribution function.
    Eval {
        #[arg(long)]
        law: Law,
        /// Comma-separated points or `start:stop:step`.
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[arg(long, default_value_t = tasep_wall::refdist::DEFAULT_NODES)]
        nodes: usize,
    },
}

fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let Some(key) = a.strip_prefix("--") else {
            return Err(Error::Config { path: a.clone(), msg: "expected `--key value`".into() });
        };
        match key.split_once('=') {
            Some((k, v)) => out.push((k.to_string(), v.to_string())),
            None => {
                let v = it.next().ok_or_else(|| Error::Config { path: key.to_string(), msg: "missing value".into() })?;
                out.push((key.to_string(), v.clone()));
            }
        }
    }
    Ok(out)
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = |m: &str| Error::Config { path: "s".into(), msg: format!("{m}: `{s}`") };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let (a, b, h) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(h > 0.0) || b < a {
            return Err(bad("need start <= stop and step > 0"));
        }
        let n = ((b - a) / h + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| a + i as f64 * h).collect());
    }
    s.split(',').map(num).collect()
}

fn finish(params: &Params, out_dir: &PathBuf, jobs: usize) -> Result<(experiment::Manifest, String)> {
    let (outcome, master) = experiment::execute(params, jobs)?;
    let manifest = experiment::write_outputs(out_dir, params, &outcome, master, jobs)?;
    Ok((manifest, outcome.summary()))
}

fn main_inner() -> Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { preset, mut config, mut out, mut jobs, overrides } => {
            // run options given after the first preset key land in `overrides`
            let mut keys = Vec::new();
            for (k, v) in parse_overrides(&overrides)? {
                match k.as_str() {
                    "config" => config = Some(PathBuf::from(v)),
                    "out" => out = Some(PathBuf::from(v)),
                    "jobs" => {
                        jobs = v.parse().map_err(|_| Error::Config { path: "jobs".into(), msg: format!("not a count: `{v}`") })?
                    }
                    _ => keys.push((k, v)),
                }
            }
            let params = Params::resolve(&preset, config.as_deref(), &keys)?;
            let dir = out.unwrap_or_else(|| PathBuf::from("out").join(&preset));
            let (manifest, summary) = finish(&params, &dir, jobs)?;
            print!("{summary}");
            println!("outputs: {}", dir.display());
            Ok(manifest.passed)
        }
        Command::Replay { manifest, out, jobs } => {
            let old = read_manifest(&manifest)?;
            let (new, summary) = finish(&old.params, &out, jobs)?;
            print!("{summary}");
            let bad = digest_mismatches(&old, &new);
            if bad.is_empty() {
                println!("replay: all {} outputs identical", new.digests.len());
            } else {
                println!("replay: differing outputs: {}", bad.join(", "));
            }
            Ok(new.passed && bad.is_empty())
        }
        Command::List => {
            for p in PRESETS {
                let d = Params::defaults(p)?;
                let keys: Vec<String> = d.values().iter().map(|(k, v)| format!("{k}={v}")).collect();
                println!("{p}: {}", keys.join(" "));
            }
            Ok(true)
        }
        Command::Refdist { command: RefdistCommand::Eval { law, s, nodes } } => {
            let q = Quadrature::new(nodes);
            let mut w = csv::Writer::from_writer(std::io::stdout().lock());
            w.write_record(["s", "value"])?;
            for x in parse_grid(&s)? {
                w.write_record([x.to_string(), q.cdf(law, x)?.to_string()])?;
            }
            w.flush()?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            ExitCode::from(2)
        }
    }
}
