mod args;
mod commands;
mod config;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::{error::ErrorKind, CommandFactory, FromArgMatches};

use args::{Cli, Command};
use commands::{header, Output};

fn parse(argv: Vec<OsString>) -> Result<Cli, ExitCode> {
    let cmd = Cli::command();
    let fail = |e: clap::Error| {
        let _ = e.print();
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
            _ => ExitCode::from(2),
        }
    };
    let matches = cmd.clone().try_get_matches_from(&argv).map_err(fail)?;
    let Some(path) = matches.get_one::<std::path::PathBuf>("config") else {
        return Cli::from_arg_matches(&matches).map_err(fail);
    };
    let merged = config::merge(&cmd, &argv, &matches, path).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })?;
    let matches = cmd.try_get_matches_from(&merged).map_err(fail)?;
    Cli::from_arg_matches(&matches).map_err(fail)
}

fn run(cli: &Cli) -> Result<Output, String> {
    let name = cli.command.name();
    let t = cli.threads;
    match &cli.command {
        Command::Check(a) => commands::run_check(a, header(name, t, a)),
        Command::Bound(a) => commands::run_bound(a, header(name, t, a)),
        Command::Curves(a) => commands::run_curves(a, header(name, t, a)),
        Command::Vario(a) => commands::run_vario(a, header(name, t, a)),
        Command::Fit(a) => commands::run_fit(a, header(name, t, a)),
        Command::Mcmc(a) => commands::run_mcmc(a, header(name, t, a)),
        Command::Dic(a) => commands::run_dic(a, header(name, t, a)),
        Command::Simulate(a) => commands::run_simulate(a, header(name, t, a)),
    }
}

fn out_path(cmd: &Command) -> Option<&std::path::Path> {
    match cmd {
        Command::Check(a) => a.out.as_deref(),
        Command::Bound(a) => a.out.as_deref(),
        Command::Curves(a) => a.out.as_deref(),
        Command::Vario(a) => a.out.as_deref(),
        Command::Fit(a) => a.out.as_deref(),
        Command::Mcmc(a) => a.out.as_deref(),
        Command::Dic(a) => a.out.as_deref(),
        Command::Simulate(a) => a.out.as_deref(),
    }
}

fn main() -> ExitCode {
    let cli = match parse(std::env::args_os().collect()) {
        Ok(cli) => cli,
        Err(code) => return code,
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        eprintln!("error: thread pool: {e}");
        return ExitCode::from(2);
    }
    let output = match run(&cli) {
        Ok(o) => o,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let written = match out_path(&cli.command) {
        Some(path) => std::fs::write(path, &output.text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(output.text.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| e.to_string())
        }
    };
    if let Err(msg) = written {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    if output.satisfied {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
