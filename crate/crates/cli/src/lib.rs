//! Command-line harness: scenario generation, batch replay with per-user
//! metrics and CDF reports, and single-user diagnostics.

pub mod args;
pub mod config;
pub mod error;
pub mod inspect;
pub mod run;
pub mod simulate;

pub use args::Cli;
pub use config::RunConfig;
pub use error::{CliError, CliResult};
pub use run::{run, RunOutput, SummaryRow};

/// Dispatches a parsed command line, writing human output to stdout.
pub fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        args::Command::Simulate(a) => {
            let s = simulate::simulate(&a)?;
            println!("wrote {} users x {} samples to {}", s.users, s.seq_len, a.out.display());
        }
        args::Command::Run(a) => {
            let cfg = RunConfig::from_args(&a)?;
            let out = run::run(&cfg)?;
            println!("{}", config::describe_source(&cfg));
            print!("{}", run::summary_table(&out.summary));
            println!("outputs in {}", cfg.output_dir.display());
        }
        args::Command::Inspect(a) => print!("{}", inspect::inspect(&a)?),
    }
    Ok(())
}
