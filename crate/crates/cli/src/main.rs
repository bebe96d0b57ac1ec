mod args;
mod artifact;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use artifact::{exit, render, write_atomic, CliResult};
use commands::Outcome;

fn run(cli: &Cli) -> CliResult<Outcome> {
    match &cli.command {
        Command::Encode(a) => commands::encode_cmd(a),
        Command::CompileQubo(a) => commands::compile_cmd(a),
        Command::Emit(a) => commands::emit_cmd(a),
        Command::Oracle(a) => commands::oracle_cmd(a),
        Command::Solve(a) => commands::solve_cmd(a),
        Command::Simulate(a) => commands::simulate_cmd(a),
        Command::Verify(a) => commands::verify_cmd(a),
        Command::Decode(a) => commands::decode_cmd(a),
    }
}

fn print_summary(rows: &[(String, String)]) {
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    for (k, v) in rows {
        println!("{k:<width$}  {v}");
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("cavity: {e}");
            return ExitCode::from(e.code());
        }
    };
    let text = render(&outcome.artifact);
    if let Some(path) = &outcome.out {
        if let Err(e) = write_atomic(path, &text) {
            eprintln!("cavity: {e}");
            return ExitCode::from(e.code());
        }
    }
    if cli.json {
        print!("{text}");
    } else {
        print_summary(&outcome.summary);
        if let Some(path) = &outcome.out {
            println!("wrote {}", path.display());
        }
    }
    ExitCode::from(outcome.code)
}
