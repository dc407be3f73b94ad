mod args;
mod commands;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use bmclab_core::Error;
use clap::Parser;

use args::{Cli, Command};

const EXIT_INPUT: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;
const EXIT_RESOURCE: u8 = 4;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidArgument(_) | Error::Json(_) => EXIT_INPUT,
        Error::Reducible { .. } | Error::Disconnected { .. } | Error::DegenerateSupport { .. } => {
            EXIT_DEGENERATE
        }
        Error::NoConvergence { .. } | Error::Io(_) => EXIT_RESOURCE,
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("BMCLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("BMCLAB_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn emit(bytes: &[u8], out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_INPUT);
    }
    let (result, out) = match &cli.command {
        Command::Classify(a) => (commands::classify(a), a.output.out.as_deref()),
        Command::Spectral(a) => (commands::spectral(a), a.output.out.as_deref()),
        Command::Simulate(a) => (commands::simulate_cmd(a), a.output.out.as_deref()),
        Command::Ctbrw(a) => (commands::ctbrw(a), a.output.out.as_deref()),
    };
    match result {
        Ok(bytes) => match emit(&bytes, out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: cannot write output: {e}");
                ExitCode::from(EXIT_RESOURCE)
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
