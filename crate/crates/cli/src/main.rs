mod args;
mod config;
mod grid;
mod output;
mod run;

use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};

use args::{Cli, COMMANDS};

fn prepare_args() -> Result<Vec<String>, String> {
    let mut args: Vec<String> = std::env::args().collect();
    if let Some(path) = config::take_config_flag(&mut args)? {
        let file = config::load(path.as_ref())?;
        config::splice(&mut args, &file, &COMMANDS)?;
    }
    Ok(args)
}

fn main() -> ExitCode {
    let args = match prepare_args() {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let command = Cli::command().mut_subcommands(|s| s.args_override_self(true));
    let cli = match command.try_get_matches_from(args).and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                run::Failure::Usage(m) => eprintln!("error: {m}"),
                run::Failure::Numeric(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(f.status())
        }
    }
}
