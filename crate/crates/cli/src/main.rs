//! `abplab`: runs verification suites and writes reports and plot data.
//!
//! Exit status is 0 when every check passes, 1 when some check fails and 2
//! on usage, config or I/O errors. Files are written only after every check
//! has run, and all at once.

mod commands;
mod config;
mod error;
mod output;
mod params;

use abplab::suite::SuiteOutput;
use clap::Parser;
use commands::{execute, Command, Outcome};
use config::ExperimentConfig;
use error::CliError;
use params::{Format, Params};
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "abplab", version, about = "Numerical checks for ABP estimates and Harnack inequalities on model spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    params: Params,
}

fn render(outcome: &Outcome, format: Format) -> Result<Vec<(String, Vec<u8>)>, CliError> {
    let mut files = Vec::new();
    for out in &outcome.outputs {
        let stem = &out.suite;
        match format {
            Format::Json => {
                let mut body = serde_json::to_vec_pretty(out)?;
                body.push(b'\n');
                files.push((format!("{stem}.json"), body));
            }
            Format::Csv => {
                files.push((format!("{stem}.csv"), output::emit_csv(&out.reports)?));
                if !out.data.is_null() {
                    let mut body = serde_json::to_vec_pretty(&out.data)?;
                    body.push(b'\n');
                    files.push((format!("{stem}_data.json"), body));
                }
            }
        }
        for s in &out.series {
            files.push((format!("{stem}_{}.dat", s.name), output::emit_plotdata(s)?));
        }
    }
    files.extend(outcome.tables.iter().cloned());
    Ok(files)
}

fn summarize(out: &SuiteOutput) {
    let failed = out.failures().count();
    println!("{}: {}/{} checks passed", out.suite, out.reports.len() - failed, out.reports.len());
    for r in out.failures() {
        let why = r.premise_violated.as_deref().map(|p| format!(" (premise: {p})")).unwrap_or_default();
        println!("  FAIL {} lhs={} rhs={}{why}", r.name, r.lhs, r.rhs);
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let (cmd, params) = match cli.command {
        Command::Run { config } => ExperimentConfig::load(&config)?.into_invocation(&cli.params),
        cmd => (cmd, cli.params),
    };
    let outcome = execute(&cmd, &params)?;
    let files = render(&outcome, params.format())?;
    let written = output::write_all(&params.out_dir(), &files)?;
    for out in &outcome.outputs {
        summarize(out);
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(outcome.outputs.iter().all(|o| o.pass))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("abplab: {e}");
            ExitCode::from(2)
        }
    }
}
