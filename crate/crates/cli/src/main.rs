mod args;
mod commands;
mod error;
mod plot;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;

use nwheat::numerics::Precision;
use nwheat::parallel::ExecMode;

use args::{Cli, Command};
use commands::Ctx;
use error::CliError;

fn open_output(cli: &Cli) -> Result<Box<dyn Write>, CliError> {
    Ok(match &cli.common.output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    if let Command::Plot(a) = &cli.command {
        let svg = plot::render(&a.input)?;
        let mut out = open_output(cli)?;
        out.write_all(svg.as_bytes())?;
        out.flush()?;
        return Ok(true);
    }
    let ctx = Ctx {
        prec: Precision::new(cli.common.prec)?,
        mode: if cli.common.sequential { ExecMode::Sequential } else { ExecMode::Parallel },
        seed: cli.common.seed,
    };
    let report = match &cli.command {
        Command::Eval(a) => commands::eval(a, &ctx)?,
        Command::Derivative(a) => commands::derivative(a, &ctx)?,
        Command::Taylor(a) => commands::taylor(a, &ctx)?,
        Command::ProofReplay(a) => commands::proof_replay(a, &ctx)?,
        Command::Envelope(a) => commands::envelope(a, &ctx)?,
        Command::Residual(a) => commands::residual(a, &ctx)?,
        Command::Walczak(a) => commands::walczak(a, &ctx)?,
        Command::Plot(_) => unreachable!(),
    };
    let mut out = open_output(cli)?;
    report.write(cli.common.format, &mut out)?;
    out.flush()?;
    Ok(report.certified)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("ERROR 2: {first}");
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("ERROR {}: {e}", e.code());
            ExitCode::from(e.code())
        }
    }
}
