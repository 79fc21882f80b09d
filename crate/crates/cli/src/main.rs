use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use woundcond::config::ExperimentConfig;
use woundcond::experiments::{self, PlotKind};
use woundcond::Error;

#[derive(Parser)]
#[command(name = "woundcond", version, about = "Wound-healing FE solver and condition-number experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration; defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides `out`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Random seed (overrides `seed`).
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, value_name = "N", default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run the model and write snapshots, norms and the ECM range summary.
    Simulate(Common),
    /// Compare the amended and original flux treatments.
    SchemeDiff {
        #[command(flatten)]
        common: Common,
        /// Use the full horizon t_end = 100 when the config leaves it unset.
        #[arg(long)]
        full_horizon: bool,
    },
    /// Condition numbers and bounds over the configured sweep.
    CondSweep(Common),
    /// Calibrate the Rayleigh-quotient constants.
    Calibrate(Common),
    /// Classify the configured point into a parameter regime.
    Classify(Common),
    /// Write a matplotlib script for a CSV produced by another command.
    Plot {
        /// CSV to plot.
        #[arg(long, value_name = "PATH")]
        csv: PathBuf,
        /// scheme-diff, cond-sweep or snapshot; inferred from the header if omitted.
        #[arg(long)]
        kind: Option<String>,
    },
}

fn load(c: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(o) = &c.out {
        cfg.out = o.clone();
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if c.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(c.threads)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate(c) => {
            let s = experiments::cmd_simulate(&load(&c)?)?;
            for snap in &s.snapshots {
                println!("t = {:>8.3}  ecm range = {:.6e}", snap.t, snap.ecm_range);
            }
            println!("steps = {}, min nodal value = {:.6e}", s.steps, s.min_value);
        }
        Command::SchemeDiff { common, full_horizon } => {
            let rows = experiments::cmd_scheme_diff(&load(&common)?, full_horizon)?;
            if let Some(r) = rows.last() {
                println!("t = {:.3}  |dg| = {:.3e}  |df| = {:.3e}  |dm| = {:.3e}  |de| = {:.3e}", r.t, r.diff[0], r.diff[1], r.diff[2], r.diff[3]);
            }
        }
        Command::CondSweep(c) => {
            let rows = experiments::cmd_cond_sweep(&load(&c)?)?;
            let violations = rows.iter().filter(|r| r.violates()).count();
            let (share, _) = experiments::dominance_agreement(&rows);
            println!("{} rows, {violations} bound violations, dominance agreement {:.1}%", rows.len(), 100.0 * share);
        }
        Command::Calibrate(c) => {
            print!("{}", experiments::cmd_calibrate(&load(&c)?)?.to_text());
        }
        Command::Classify(c) => {
            let r = experiments::cmd_classify(&load(&c)?)?;
            println!("case {} ({} dominant, {})", r.case, r.dominant, r.regime);
        }
        Command::Plot { csv, kind } => {
            let kind = kind.map(|k| k.parse::<PlotKind>()).transpose()?;
            println!("{}", experiments::cmd_plot(&csv, kind)?.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else if e.is_solver_failure() {
                ExitCode::from(3)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
