//! `gazeguide`: train the models, generate with gaze weights, turn gaze
//! recordings into reading measures, and emit plot-ready CSVs.

mod commands;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = commands::Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 3 for numeric failures, 2 for everything else.
fn exit_code(e: &anyhow::Error) -> u8 {
    let numeric = e
        .chain()
        .filter_map(|c| c.downcast_ref::<gazeguide::Error>())
        .any(gazeguide::Error::is_numeric);
    if numeric {
        3
    } else {
        2
    }
}
