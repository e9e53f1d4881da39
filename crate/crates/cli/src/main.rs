use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use mmsched_cli::{ordering_violations, run, solve_network, Algo, RunArgs, SolveArgs};

#[derive(Debug, Parser)]
#[command(name = "mmsched", version, about = "Max-min fair mmWave backhaul scheduling experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate grid scenarios and compare solvers over seeded trials
    Run(RunArgs),
    /// Solve a single network given as JSON and print the schedule
    Solve(SolveArgs),
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> Result<()> {
    match Cli::parse().cmd {
        Command::Run(args) => {
            let records = match &args.output {
                Some(p) => {
                    let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
                    run(&args, BufWriter::new(f))?
                }
                None => run(&args, io::stdout().lock())?,
            };
            let failed = records.iter().filter(|r| r.error.is_some()).count();
            if failed > 0 {
                eprintln!("warning: {failed} record(s) failed; see the error column");
            }
            if args.algo == Algo::All {
                for msg in ordering_violations(&records) {
                    eprintln!("warning: {msg}");
                }
            }
        }
        Command::Solve(args) => {
            let v = solve_network(&args)?;
            let mut out = io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, &v)?;
            writeln!(out)?;
        }
    }
    Ok(())
}
