mod args;
mod commands;
mod io;
mod training;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Segment(a) => commands::segment(&a),
        Command::Corrupt(a) => commands::corrupt(&a),
        Command::Fixtures(a) => commands::fixtures(&a),
        Command::TrainBaseline(a) => commands::train_baseline(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Correct(a) => commands::correct(&a),
        Command::Attention(a) => commands::attention(&a),
        Command::Train(a) => training::train(&a),
        Command::Sweep(a) => training::sweep(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if cli.quiet {
        "warn"
    } else {
        "info"
    }))
    .format_timestamp(None)
    .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
