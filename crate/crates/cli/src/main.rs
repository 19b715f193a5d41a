//! `moran`: build Moran sets, compute outer images, certify interval
//! containment and run the case studies. Reports go to stdout or `--out`;
//! diagnostics go to stderr as `error[code]: message`.
//!
//! Exit codes: 0 on success, 1 on input errors and cap overruns, 2 when
//! `certify --require` finds no satisfied certificate.

mod args;
mod run;

use std::fs;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use run::{Caps, Diagnostic, Outcome};

fn execute(cli: &Cli) -> Result<Outcome, Diagnostic> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Diagnostic::new("invalid-params", "--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Diagnostic::new("internal", e))?;
    }
    let caps = Caps::from_env()?;
    match &cli.command {
        Command::Build(a) => run::build(a, cli.format, &caps),
        Command::Image(a) => run::image(a, cli.format, &caps),
        Command::Certify(a) => run::certify_cmd(a, cli.format, &caps),
        Command::Case(a) => run::case(a, cli.format, &caps),
    }
}

fn report(d: &Diagnostic) {
    eprintln!("error[{}]: {}", d.code, d.message);
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            eprintln!("error[usage]: {}", msg.trim_start_matches("error: ").trim_end());
            return ExitCode::from(1);
        }
    };
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(d) => {
            report(&d);
            return ExitCode::from(1);
        }
    };
    let written = match &cli.out {
        Some(path) => fs::write(path, &outcome.report)
            .map_err(|e| Diagnostic::new("io", format!("{}: {e}", path.display()))),
        None => {
            print!("{}", outcome.report);
            Ok(())
        }
    };
    if let Err(d) = written {
        report(&d);
        return ExitCode::from(1);
    }
    match outcome.failure {
        Some((code, d)) => {
            report(&d);
            ExitCode::from(code as u8)
        }
        None => ExitCode::SUCCESS,
    }
}
