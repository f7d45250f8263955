//! `toma` — batch simulator for towed movable-antenna downlinks.
//!
//! Subcommands: `optimize` (trace a single geometry optimization),
//! `run` (full experiment grid to CSV), `analyze-theorems` (closed-form
//! minimum-correlation laws vs search), and `validate-config` (echo the
//! fully resolved configuration). All accept the same flags; see
//! `toma --help`.

mod config;
mod experiment;
mod report;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{ExperimentKind, ExperimentSpec, Scheme};
use experiment::RunOptions;

#[derive(Parser)]
#[command(name = "toma", version, about = "Towed movable-antenna downlink simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize the configured scenario from the hybrid start and print
    /// the per-iteration objective trace.
    Optimize(CommonArgs),
    /// Run the configured experiment grid and write results.csv.
    Run(CommonArgs),
    /// Compare the closed-form minimum-correlation laws against
    /// brute-force orientation search; writes theorems.csv.
    AnalyzeTheorems(CommonArgs),
    /// Parse and validate the configuration, echoing the resolved form.
    ValidateConfig(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML experiment configuration; built-in defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the configured RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for CSV and metadata files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker thread count (parallel builds only).
    #[arg(long)]
    threads: Option<usize>,
    /// Single-threaded evaluation with zeroed timing columns, for
    /// byte-stable output.
    #[arg(long)]
    deterministic: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let (Command::Optimize(args)
    | Command::Run(args)
    | Command::AnalyzeTheorems(args)
    | Command::ValidateConfig(args)) = &cli.command;

    configure_threads(args);
    let mut spec = load_spec(args)?;
    if let Some(seed) = args.seed {
        spec.scenario.seed = seed;
    }
    let opts = RunOptions {
        seed: spec.scenario.seed,
        deterministic: args.deterministic,
    };

    match &cli.command {
        Command::ValidateConfig(_) => {
            print!("{}", config::serialize_config(&spec));
        }
        Command::AnalyzeTheorems(args) => {
            write_theorems(&spec, &opts, args)?;
        }
        Command::Run(args) => {
            // A config may itself request the theorem tables.
            if spec.kind == ExperimentKind::AnalyzeTheorems {
                write_theorems(&spec, &opts, args)?;
            } else {
                let rows = experiment::run_experiment(&spec, &opts)?;
                write_results(&spec, &opts, args, &rows)?;
                println!(
                    "wrote {} rows to {}",
                    rows.len(),
                    args.out.join("results.csv").display()
                );
            }
        }
        Command::Optimize(args) => {
            spec.kind = ExperimentKind::Convergence;
            spec.schemes = vec![Scheme::TomaOpt];
            spec.sweep.clear();
            let rows = experiment::run_experiment(&spec, &opts)?;
            for row in &rows {
                match (row.rate_bps_hz, row.error.is_empty()) {
                    (Some(rate), true) => {
                        println!("outer {:>3}  rate {rate:.6} bps/Hz", row.sweep_value)
                    }
                    _ => println!("outer {:>3}  failed: {}", row.sweep_value, row.error),
                }
            }
            write_results(&spec, &opts, args, &rows)?;
        }
    }
    Ok(())
}

fn load_spec(args: &CommonArgs) -> Result<ExperimentSpec> {
    let text = match &args.config {
        Some(path) => fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?,
        None => String::new(),
    };
    Ok(config::parse_config(&text)?)
}

fn write_results(
    spec: &ExperimentSpec,
    opts: &RunOptions,
    args: &CommonArgs,
    rows: &[experiment::ResultRow],
) -> Result<()> {
    let csv = report::results_csv(rows);
    let meta = report::metadata_toml(spec, opts.seed, opts.deterministic);
    report::write_outputs(&args.out, &[("results.csv", &csv), ("metadata.toml", &meta)])
        .with_context(|| format!("writing outputs to {}", args.out.display()))?;
    Ok(())
}

fn write_theorems(spec: &ExperimentSpec, opts: &RunOptions, args: &CommonArgs) -> Result<()> {
    let rows = experiment::analyze_theorems(opts.seed);
    let csv = report::theorems_csv(&rows);
    let meta = report::metadata_toml(spec, opts.seed, opts.deterministic);
    report::write_outputs(&args.out, &[("theorems.csv", &csv), ("metadata.toml", &meta)])
        .with_context(|| format!("writing outputs to {}", args.out.display()))?;
    println!(
        "wrote {} law/search comparisons to {}",
        rows.len(),
        args.out.join("theorems.csv").display()
    );
    Ok(())
}

/// Applies `--threads` / `--deterministic` to the global worker pool.
/// The sequential build has no pool; the flags are accepted and ignored.
fn configure_threads(args: &CommonArgs) {
    #[cfg(feature = "parallel")]
    {
        let threads = if args.deterministic {
            Some(1)
        } else {
            args.threads
        };
        if let Some(n) = threads {
            // Ignore the error from a pool that is already built (tests
            // may call through this path repeatedly in one process).
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = args;
    }
}
