use mcspredict_core::{generate_scenario, write_traces, ScenarioConfig};

use crate::args::SimulateArgs;
use crate::config::{apply_scenario, RunConfig};
use crate::error::{CliError, CliResult};

/// Generates the configured scenario and writes it to `args.out`.
pub fn simulate(args: &SimulateArgs) -> CliResult<ScenarioConfig> {
    let mut scenario = match &args.config {
        Some(p) => RunConfig::load(p)?.scenario,
        None => ScenarioConfig::default(),
    };
    apply_scenario(&mut scenario, &args.scenario);
    let traces = generate_scenario(&scenario).map_err(CliError::config)?;
    if let Err(e) = write_traces(&args.out, &traces) {
        let _ = std::fs::remove_file(&args.out);
        return Err(CliError::Io(std::io::Error::other(e.to_string())));
    }
    Ok(scenario)
}
