use clap::Parser;
use mcspredict_cli::{execute, Cli};

fn main() {
    if let Err(e) = execute(Cli::parse()) {
        eprintln!("mcspredict: {e}");
        std::process::exit(e.exit_code());
    }
}
