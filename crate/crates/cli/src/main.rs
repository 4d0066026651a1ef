//! `stopbound`: monopoly prices, bound tables, prophet ratios and Monte Carlo
//! checks from the command line.

mod spec;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;
use stopbound::{
    c_constant, min_payoff_finite_random, min_payoff_uniform, revenue, simulate_policy_vs_instance,
    solve_monopoly, solve_worst_ratio, DistSpec, PolicySpec, SimConfig, ThresholdPolicy,
    WorstCaseInstance,
};

use spec::{load_json, parse_n_list, Command, RunSpec};
use table::{bound_rows, write_rows, Format, Scaling};

#[derive(Parser)]
#[command(
    name = "stopbound",
    version,
    about = "Robust threshold-stopping bounds"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Monopoly price, revenue and curvature constant, as JSON.
    Monopoly {
        /// Distribution spec: inline JSON or a path to a JSON file.
        #[arg(long)]
        dist: String,
    },
    /// Bound table, one row per n.
    Bounds {
        #[arg(long)]
        dist: String,
        /// Comma list; items may be ranges `a..b` or `a..b:step`.
        #[arg(long = "n")]
        n_list: String,
        #[arg(long, value_enum, default_value = "none")]
        scaling: Scaling,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Worst-case prophet ratio for a given mean and variance.
    Prophet {
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        sigma2: f64,
    },
    /// Simulates a policy against its worst-case instance.
    Simulate {
        #[arg(long)]
        dist: String,
        /// Policy spec: inline JSON or a path to a JSON file.
        #[arg(long)]
        policy: String,
        #[arg(long = "n")]
        n: usize,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        antithetic: bool,
    },
    /// Bound table for the Fréchet(2.197, 0.613) law under sqrt(n) scaling,
    /// n = 2..55 and 60..900 in steps of 15.
    #[command(name = "figure2")]
    Reference {
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

const REFERENCE_DIST: &str = r#"{"family":"frechet","shape":2.197,"scale":0.613}"#;
const REFERENCE_N: &str = "2..55,60..900:15";

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn print_json(v: &serde_json::Value) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn table(run: &RunSpec, scaling: Scaling, format: Format) -> Result<ExitCode> {
    let d = run.dist()?;
    let rows = bound_rows(&d, &run.n_list, scaling)?;
    let mut out = sink(&run.output)?;
    write_rows(&rows, format, &mut out)?;
    out.flush()?;
    let failed = rows.iter().filter(|r| !r.ok()).count();
    if failed > 0 {
        eprintln!(
            "{}: {failed} of {} rows incomplete",
            run.command,
            rows.len()
        );
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn analytic_payoff(
    d: &stopbound::MaxDistribution,
    policy: &ThresholdPolicy,
    n: usize,
) -> Result<f64> {
    Ok(match policy {
        ThresholdPolicy::Deterministic { t } => revenue(d, *t),
        ThresholdPolicy::FiniteRandom { .. } => min_payoff_finite_random(d, policy, n)?,
        ThresholdPolicy::UniformRandom { lo, hi } => min_payoff_uniform(d, *lo, *hi, n, true)?,
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Monopoly { dist } => {
            let spec: DistSpec = load_json(&dist, "distribution")?;
            let d = stopbound::MaxDistribution::try_from(spec)?;
            let m = solve_monopoly(&d)?;
            let c = if d.is_continuous() {
                c_constant(&d, m.p_star).ok()
            } else {
                None
            };
            print_json(&json!({
                "p_star": m.p_star,
                "pi_star": m.pi_star,
                "c": c,
                "unique": m.unique,
            }))?;
        }
        Cmd::Bounds {
            dist,
            n_list,
            scaling,
            format,
            out,
        } => {
            let spec: DistSpec = load_json(&dist, "distribution")?;
            let run = RunSpec::new(Command::Bounds, spec, parse_n_list(&n_list)?, out, 0)?;
            return table(&run, scaling, format);
        }
        Cmd::Reference { format, out } => {
            let spec: DistSpec = load_json(REFERENCE_DIST, "distribution")?;
            let run = RunSpec::new(Command::Reference, spec, parse_n_list(REFERENCE_N)?, out, 0)?;
            return table(&run, Scaling::SqrtN, format);
        }
        Cmd::Prophet { mu, sigma2 } => {
            let s = solve_worst_ratio(mu, sigma2)?;
            print_json(&serde_json::to_value(s)?)?;
        }
        Cmd::Simulate {
            dist,
            policy,
            n,
            samples,
            seed,
            antithetic,
        } => {
            let spec: DistSpec = load_json(&dist, "distribution")?;
            let run = RunSpec::new(Command::Simulate, spec, vec![n], None, seed)?;
            let d = run.dist()?;
            let pspec: PolicySpec = load_json(&policy, "policy")?;
            let pol = ThresholdPolicy::try_from(pspec)?;
            let inst = WorstCaseInstance::for_policy(&pol, n)?;
            let analytic = analytic_payoff(&d, &pol, n)?;
            let cfg = SimConfig {
                samples,
                seed: run.seed,
                antithetic,
            };
            let r = simulate_policy_vs_instance(&d, &inst, &pol, &cfg)?;
            let z = if r.std_error > 0.0 {
                (r.mean_payoff - analytic) / r.std_error
            } else {
                0.0
            };
            print_json(&json!({
                "n": n,
                "analytic": analytic,
                "mc_mean": r.mean_payoff,
                "std_error": r.std_error,
                "z_score": z,
                "samples": r.samples,
                "seed": run.seed,
            }))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
