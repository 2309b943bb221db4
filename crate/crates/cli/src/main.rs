use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use bla_core::{run, RunConfig, RunReport};
use clap::{Parser, Subcommand};

mod sweep;

use sweep::{sweep, SweepOptions, SweepSpec};

/// Simulator for synchronous Byzantine lattice agreement.
///
/// Exit status: 0 when every verdict passes, 1 on a property failure,
/// 2 on a usage or configuration error.
#[derive(Parser)]
#[command(name = "bla", version)]
struct Cli {
    /// Only print failures and errors.
    #[arg(long, global = true)]
    quiet: bool,
    /// Flip every verdict before reporting. Exercises the failure path.
    #[arg(long, global = true, hide = true)]
    invert_verdicts: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one config and write its report.
    Run {
        /// RunConfig JSON.
        #[arg(long)]
        config: PathBuf,
        /// Where to write the RunReport JSON.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every point of a sweep spec and write one report per point plus
    /// summary.csv.
    Sweep {
        /// SweepSpec JSON.
        #[arg(long)]
        spec: PathBuf,
        /// Output directory, created if missing.
        #[arg(long)]
        out_dir: PathBuf,
        /// Stop starting new points after the first failure.
        #[arg(long)]
        fail_fast: bool,
        /// Worker threads [default: available cores].
        #[arg(long)]
        jobs: Option<usize>,
    },
}

/// Outcome of a command that got far enough to check properties.
enum Status {
    Pass,
    PropertyFailure,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Run { config, out } => cmd_run(config, out, &cli),
        Cmd::Sweep {
            spec,
            out_dir,
            fail_fast,
            jobs,
        } => cmd_sweep(spec, out_dir, *fail_fast, *jobs, &cli),
    };
    match result {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::PropertyFailure) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn write_report(report: &RunReport, out: &Path) -> Result<()> {
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(out, report.to_json()).with_context(|| format!("cannot write {}", out.display()))
}

fn cmd_run(config: &Path, out: &Path, cli: &Cli) -> Result<Status> {
    let text = fs::read_to_string(config).with_context(|| format!("cannot read config {}", config.display()))?;
    let cfg = RunConfig::from_json(&text).with_context(|| format!("invalid config {}", config.display()))?;
    let mut report = run(&cfg)?;
    if cli.invert_verdicts {
        report.invert_verdicts();
    }
    write_report(&report, out)?;
    if report.all_pass {
        if !cli.quiet {
            println!(
                "pass: {} verdicts, {} sub-rounds, {} envelopes; report {}",
                report.verdicts.len(),
                report.sub_rounds,
                report.envelopes.total,
                out.display()
            );
        }
        return Ok(Status::Pass);
    }
    for v in report.failed() {
        let witness = v.witness.as_ref().map(|w| w.to_string()).unwrap_or_default();
        eprintln!("FAIL {} {}", v.name, witness);
    }
    eprintln!("witness: {}", out.display());
    Ok(Status::PropertyFailure)
}

fn cmd_sweep(spec: &Path, out_dir: &Path, fail_fast: bool, jobs: Option<usize>, cli: &Cli) -> Result<Status> {
    let spec = SweepSpec::from_path(spec)?;
    let opts = SweepOptions {
        fail_fast,
        invert_verdicts: cli.invert_verdicts,
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build()?;
    let outcome = pool.install(|| sweep(&spec, out_dir, &opts))?;
    let failures: Vec<_> = outcome.failures().collect();
    for r in &failures {
        eprintln!("FAIL {} [{}]", r.report.display(), r.failed.join(", "));
    }
    if !cli.quiet || !failures.is_empty() {
        let skipped = outcome.points - outcome.results.len();
        let mut line = format!(
            "{} of {} points failed; summary {}",
            failures.len(),
            outcome.results.len(),
            outcome.summary.display()
        );
        if skipped > 0 {
            line.push_str(&format!(" ({skipped} skipped after first failure)"));
        }
        if failures.is_empty() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
    Ok(if failures.is_empty() {
        Status::Pass
    } else {
        Status::PropertyFailure
    })
}
