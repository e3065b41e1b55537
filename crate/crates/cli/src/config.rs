//! Run configuration: an optional TOML file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use mcspredict_core::{
    default_rate_table, load_traces, Alphabet, PipelineConfig, PredictorKind, RateTable, ScenarioConfig, Trace,
};
use serde::{Deserialize, Serialize};

use crate::args::{InputArgs, PipelineArgs, RunArgs, ScenarioArgs};
use crate::error::{CliError, CliResult};

pub const OUTPUT_DIR_ENV: &str = "MCSPREDICT_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    /// Replay this trace file instead of generating the scenario.
    pub trace: Option<PathBuf>,
    pub predictors: Vec<PredictorKind>,
    pub pipeline: PipelineConfig,
    /// `mcs,rate` CSV overriding the default rate table.
    pub rates: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// Worker threads; `None` uses the available parallelism.
    pub jobs: Option<usize>,
    pub log_predictions: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            trace: None,
            predictors: PredictorKind::ALL.to_vec(),
            pipeline: PipelineConfig::default(),
            rates: None,
            output_dir: PathBuf::from("out"),
            jobs: None,
            log_predictions: true,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> CliResult<Self> {
        toml::from_str(s).map_err(CliError::config)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Config file (if any) with every given flag applied on top.
    pub fn from_args(args: &RunArgs) -> CliResult<Self> {
        let mut cfg = match &args.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        apply_input(&mut cfg.scenario, &mut cfg.trace, &args.input);
        apply_pipeline(&mut cfg.pipeline, &args.pipeline);
        if let Some(p) = &args.predictors {
            cfg.predictors = p.clone();
        }
        if let Some(r) = &args.rates {
            cfg.rates = Some(r.clone());
        }
        if let Some(d) = &args.output_dir {
            cfg.output_dir = d.clone();
        }
        if let Some(j) = args.jobs {
            cfg.jobs = Some(j);
        }
        if args.no_prediction_log {
            cfg.log_predictions = false;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.pipeline.validate().map_err(CliError::config)?;
        if self.trace.is_none() {
            self.scenario.validate().map_err(CliError::config)?;
        }
        if self.predictors.is_empty() {
            return Err(CliError::Config("no predictors selected".into()));
        }
        let mut seen = self.predictors.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.predictors.len() {
            return Err(CliError::Config("predictor listed twice".into()));
        }
        if self.jobs == Some(0) {
            return Err(CliError::Config("jobs must be at least 1".into()));
        }
        Ok(())
    }

    /// Rate table and the traces to replay.
    pub fn load_inputs(&self) -> CliResult<(RateTable, Vec<Trace>)> {
        load_inputs(&self.scenario, self.trace.as_deref(), self.rates.as_deref())
    }
}

pub(crate) fn apply_input(scenario: &mut ScenarioConfig, trace: &mut Option<PathBuf>, a: &InputArgs) {
    apply_scenario(scenario, &a.scenario);
    if let Some(t) = &a.trace {
        *trace = Some(t.clone());
    }
    if a.scenario.scenario.is_some() {
        *trace = None;
    }
}

pub(crate) fn apply_scenario(s: &mut ScenarioConfig, a: &ScenarioArgs) {
    if let Some(l) = a.scenario {
        s.loading = l;
    }
    if let Some(u) = a.users {
        s.users = u;
    }
    if let Some(n) = a.seq_len {
        s.seq_len = n;
    }
    if let Some(seed) = a.seed {
        s.seed = seed;
    }
    if let Some(rho) = a.rho {
        s.rho = rho;
    }
    if let Some(d) = a.diversity {
        s.diversity = d;
    }
}

pub(crate) fn apply_pipeline(p: &mut PipelineConfig, a: &PipelineArgs) {
    macro_rules! set {
        ($($field:ident <- $flag:ident),* $(,)?) => {
            $(if let Some(v) = a.$flag { p.$field = v; })*
        };
    }
    set!(
        tree_depth <- depth,
        max_order <- max_order,
        epsilon <- epsilon,
        criterion <- criterion,
        sample_mode <- sample_mode,
        param_count <- param_count,
        recompute_period <- recompute,
        bootstrap_len <- bootstrap,
        median_window <- median_window,
        fm_order <- fm_order,
    );
}

pub(crate) fn load_inputs(
    scenario: &ScenarioConfig,
    trace: Option<&Path>,
    rates: Option<&Path>,
) -> CliResult<(RateTable, Vec<Trace>)> {
    let rates = match rates {
        Some(p) => RateTable::load_csv(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
        None => {
            let p = match trace {
                Some(_) => mcspredict_core::alphabet::DEFAULT_ALPHABET_SIZE,
                None => scenario.alphabet().map_err(CliError::config)?.size(),
            };
            default_rate_table(p).map_err(CliError::config)?
        }
    };
    let alphabet = Alphabet::new(rates.len()).map_err(CliError::input)?;
    let traces = match trace {
        Some(p) => load_traces(p, &alphabet).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
        None => {
            if scenario.alphabet().map_err(CliError::config)?.size() != alphabet.size() {
                return Err(CliError::Config(format!(
                    "rate table has {} entries but the scenario produces {} MCS levels",
                    alphabet.size(),
                    scenario.thresholds_db.len() + 1
                )));
            }
            mcspredict_core::generate_scenario(scenario).map_err(CliError::config)?
        }
    };
    if traces.is_empty() {
        return Err(CliError::Input("no users to process".into()));
    }
    Ok((rates, traces))
}

/// Where a run's traces come from, for messages.
pub fn describe_source(cfg: &RunConfig) -> String {
    match &cfg.trace {
        Some(p) => format!("trace {}", p.display()),
        None => format!(
            "{}-loading scenario, {} users, seed {}",
            cfg.scenario.loading, cfg.scenario.users, cfg.scenario.seed
        ),
    }
}
