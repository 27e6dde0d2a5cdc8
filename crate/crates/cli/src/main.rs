use std::io::Write;

use clap::Parser;

use spectra_cli::{execute, render, Cli};

fn main() {
    let cli = Cli::parse();
    // Panics are reported as internal errors (exit 4), not the default 101.
    std::panic::set_hook(Box::new(|_| {}));
    let out = execute(&cli.command);
    // A closed pipe must not turn into a panic exit code.
    if let Some(r) = &out.report {
        let _ = writeln!(std::io::stdout().lock(), "{}", render(r));
    }
    if let Some(e) = &out.error {
        let _ = writeln!(std::io::stderr().lock(), "{}", render(e));
    }
    std::process::exit(out.exit_code);
}
