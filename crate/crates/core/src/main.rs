use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use irs_mimo::experiments::{
    check_props_report, optimize_report, oracle_report, parse_config, place_report, render_csv,
    run_sweep, ExperimentSpec,
};
use irs_mimo::Result;

#[derive(Parser)]
#[command(
    name = "irs-mimo",
    version,
    about = "Multi-surface IRS-aided MIMO experiments"
)]
struct Cli {
    /// Experiment document (YAML); reference values are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; defaults to the document's `output` key, then stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress progress messages on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    /// Exit nonzero if any sweep row failed.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List candidate placements and the greedy selection.
    Place,
    /// Optimize one scenario and print the allocation.
    Optimize,
    /// Run the configured sweep and write CSV.
    Sweep,
    /// Exhaustive element split for a small scenario.
    Oracle,
    /// Check the closed-form threshold, equal-split and slope results.
    CheckProps,
}

fn load(cli: &Cli) -> Result<ExperimentSpec> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)?,
        None => String::new(),
    };
    parse_config(&text)
}

fn deliver(cli: &Cli, spec: &ExperimentSpec, text: &str) -> Result<()> {
    match cli.out.as_ref().or(spec.output_path.as_ref()) {
        Some(path) => {
            std::fs::write(path, text)?;
            if !cli.quiet {
                eprintln!("wrote {}", path.display());
            }
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    let spec = load(cli)?;
    let ok = match cli.command {
        Command::Place => {
            deliver(cli, &spec, &place_report(&spec.scenario)?)?;
            true
        }
        Command::Optimize => {
            deliver(cli, &spec, &optimize_report(&spec)?)?;
            true
        }
        Command::Oracle => {
            deliver(cli, &spec, &oracle_report(&spec.scenario)?)?;
            true
        }
        Command::Sweep => {
            let rows = run_sweep(&spec);
            let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
            deliver(cli, &spec, &render_csv(&rows)?)?;
            if !cli.quiet {
                eprintln!("{} rows, {failed} failed", rows.len());
            }
            !(cli.strict && failed > 0)
        }
        Command::CheckProps => {
            let (text, passed) = check_props_report(&spec.scenario)?;
            deliver(cli, &spec, &text)?;
            passed
        }
    };
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
