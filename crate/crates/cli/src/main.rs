//! `defilab`: command-line front end for defilab-core.
//!
//! Data goes to standard output, diagnostics to standard error. Exit codes:
//! 0 success, 1 domain error, 2 usage error.

mod args;
mod run;

use clap::Parser;

fn main() {
    // Die quietly when a downstream pipe closes instead of panicking.
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = args::Cli::parse();
    match run::run(cli) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}
