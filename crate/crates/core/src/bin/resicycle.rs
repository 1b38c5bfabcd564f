use std::io;
use std::panic;
use std::process::ExitCode;

use resicycle::cli::{self, EXIT_INTERNAL};

fn main() -> ExitCode {
    let outcome = panic::catch_unwind(|| {
        let stdout = io::stdout();
        let stderr = io::stderr();
        cli::run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
    });
    let code = outcome.unwrap_or(EXIT_INTERNAL);
    ExitCode::from(code as u8)
}
