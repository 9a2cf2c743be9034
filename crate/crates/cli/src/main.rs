use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use radrec_cli::app::{configure_threads, execute, Cli, THREADS_ENV};
use radrec_cli::error::{EXIT_OK, EXIT_VALIDATION};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap's own usage code is 2, which is reserved for numerical failures here
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_VALIDATION,
            };
            return ExitCode::from(code as u8);
        }
    };
    let threads = std::env::var(THREADS_ENV).ok();
    let result = configure_threads(threads.as_deref()).and_then(|_| execute(cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
