use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use log::info;
use vpmcf_core::fields::PeriodicGrid;
use vpmcf_core::harness::{self, Check, Outcome, RunConfig, SweepPlan, OUTPUT_ENV};
use vpmcf_core::Error;

/// Exit status when a run completed but an invariant failed.
const EXIT_INVARIANT: u8 = 1;
/// Exit status for invalid arguments or configuration.
const EXIT_USAGE: u8 = 2;
/// Exit status for I/O errors and solver failures.
const EXIT_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(name = "vpmcf", version, about = "Volume-preserving mean curvature flow laboratory")]
struct Cli {
    /// More log output (-v info, -vv debug); RUST_LOG takes precedence.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the phase-field solver and write its ledger and snapshots.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to $VPMCF_OUTPUT_DIR, then `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the front tracker from the configured initial shape.
    Track {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build and certify the calibration of a curve snapshot.
    Calibrate {
        /// Curve CSV (columns x, y) with optional JSON sidecar.
        #[arg(long)]
        curve: PathBuf,
        /// Normal speed column (CSV, column v), one value per node.
        #[arg(long)]
        velocity: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Grid nodes per side.
        #[arg(long, default_value_t = 256)]
        grid: usize,
        #[arg(long, default_value_t = 1.0)]
        side: f64,
        /// Tube radius; defaults to the curvature-limited radius.
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Pair a phase-field run with a front-tracking run.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        phase: PathBuf,
        #[arg(long)]
        track: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run simulate and compare over an eps ladder.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Parallel members; defaults to the available cores.
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn env_out(out: Option<PathBuf>) -> anyhow::Result<PathBuf> {
    out.or_else(|| {
        std::env::var_os(OUTPUT_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
    })
    .ok_or_else(|| {
        Error::Config {
            key: "out".into(),
            reason: format!("pass --out or set {OUTPUT_ENV}"),
        }
        .into()
    })
}

fn report<S>(what: &str, dir: &Path, outcome: &Outcome<S>) -> u8 {
    for Check {
        name,
        value,
        bound,
        passed,
    } in &outcome.checks
    {
        let mark = if *passed { "ok" } else { "FAILED" };
        println!("{what}: {name} = {value:e} (bound {bound:e}) {mark}");
    }
    println!("{what}: artifacts in {}", dir.display());
    if outcome.passed() {
        0
    } else {
        EXIT_INVARIANT
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Simulate { config, out } => {
            let cfg = RunConfig::load(&config)?;
            let dir = cfg.output_dir(out.as_deref())?;
            let o = harness::simulate(&cfg, &dir)?;
            Ok(report("simulate", &dir, &o))
        }
        Command::Track { config, out } => {
            let cfg = RunConfig::load(&config)?;
            let dir = cfg.output_dir(out.as_deref())?;
            let o = harness::track(&cfg, &dir)?;
            Ok(report("track", &dir, &o))
        }
        Command::Calibrate {
            curve,
            velocity,
            out,
            grid,
            side,
            delta,
        } => {
            let dir = env_out(out)?;
            let grid = PeriodicGrid::new(grid, side)?;
            let o = harness::calibrate(&curve, Some(&velocity), grid, delta, &dir)?;
            info!("lambda* = {}", o.summary.lambda_star);
            Ok(report("calibrate", &dir, &o))
        }
        Command::Compare {
            config,
            phase,
            track,
            out,
        } => {
            let cfg = RunConfig::load(&config)?;
            let dir = cfg.output_dir(out.as_deref())?;
            let o = harness::compare(&cfg, &phase, &track, &dir)?;
            Ok(report("compare", &dir, &o))
        }
        Command::Sweep { config, out, workers } => {
            let plan = SweepPlan::load(&config)?;
            let dir = plan.base.output_dir(out.as_deref())?;
            let o = harness::sweep(&plan, &dir, workers).with_context(|| format!("sweep in {}", dir.display()))?;
            for r in &o.summary.rows {
                println!(
                    "sweep: eps={} n={} E_S={:.6} drift={:.3e} bound={:.3e} symdiff={:.4e} E_rel={:.4e}",
                    r.eps, r.n, r.e_s_final, r.volume_drift_max, r.drift_bound, r.symdiff_area, r.e_rel_final
                );
            }
            Ok(report("sweep", &dir, &o))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Config { .. } | Error::InvalidParameter { .. } | Error::InvalidGrid(_)) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(passed: bool) -> Outcome<()> {
        Outcome {
            summary: (),
            checks: vec![Check::at_most("x", if passed { 0.0 } else { 2.0 }, 1.0)],
        }
    }

    #[test]
    fn failed_invariants_map_to_their_exit_code() {
        assert_eq!(report("t", Path::new("."), &outcome(true)), 0);
        assert_eq!(report("t", Path::new("."), &outcome(false)), EXIT_INVARIANT);
    }

    #[test]
    fn config_errors_are_usage_errors() {
        let e: anyhow::Error = Error::Config {
            key: "phase.eps".into(),
            reason: "r".into(),
        }
        .into();
        assert_eq!(exit_code(&e.context("wrapped")), EXIT_USAGE);
        let io: anyhow::Error = Error::Misaligned("m".into()).into();
        assert_eq!(exit_code(&io), EXIT_FAILURE);
    }
}
