use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use perbound_cli::{emit, exit_code, parse_request_with, run, CliError, Command, Format, Overrides, USAGE_EXIT};

/// Analyse unital completely positive maps: spectra, peripheral spaces, boundary algebras and
/// classification.
#[derive(Debug, Parser)]
#[command(name = "perbound", version)]
struct Args {
    /// Request JSON file; reads stdin when omitted or `-`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Analysis to run (repeatable); replaces the request's command list.
    #[arg(long = "command", value_enum)]
    commands: Vec<Command>,
    #[arg(long)]
    tol_eq: Option<f64>,
    #[arg(long)]
    tol_peripheral: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn read_input(path: Option<&PathBuf>) -> Result<String, CliError> {
    match path {
        Some(p) if p.as_os_str() != "-" => Ok(std::fs::read_to_string(p)?),
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let overrides = Overrides {
        commands: args.commands,
        eq_tol: args.tol_eq,
        peripheral_tol: args.tol_peripheral,
        seed: args.seed,
    };
    let request = match read_input(args.input.as_ref()).and_then(|text| parse_request_with(&text, &overrides)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("perbound: {e}");
            return ExitCode::from(USAGE_EXIT as u8);
        }
    };
    let report = run(&request);
    let bytes = emit(&report, args.format);
    if let Err(e) = io::stdout().lock().write_all(&bytes) {
        eprintln!("perbound: {e}");
        return ExitCode::from(USAGE_EXIT as u8);
    }
    ExitCode::from(exit_code(&report) as u8)
}
