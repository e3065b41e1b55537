//! Per-user diagnostics at a chosen position.

use std::fmt::Write as _;

use mcspredict_core::{Alphabet, FrequencyTree, PredictorKind, UserPipeline};

use crate::args::{InspectArgs, TreeView};
use crate::config::{apply_input, apply_pipeline, load_inputs, RunConfig};
use crate::error::{CliError, CliResult};

/// Renders the diagnostic dump of `user` after its first `upto` symbols.
pub fn inspect(args: &InspectArgs) -> CliResult<String> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    apply_input(&mut cfg.scenario, &mut cfg.trace, &args.input);
    apply_pipeline(&mut cfg.pipeline, &args.pipeline);
    if let Some(r) = &args.rates {
        cfg.rates = Some(r.clone());
    }
    cfg.pipeline.validate().map_err(CliError::config)?;
    if cfg.trace.is_none() {
        cfg.scenario.validate().map_err(CliError::config)?;
    }
    let (rates, traces) = load_inputs(&cfg.scenario, cfg.trace.as_deref(), cfg.rates.as_deref())?;
    let trace = traces
        .iter()
        .find(|t| t.user_id == args.user)
        .ok_or_else(|| CliError::Input(format!("unknown user `{}`", args.user)))?;
    let alphabet = Alphabet::new(rates.len()).map_err(CliError::input)?;
    let symbols = trace.symbols();
    let upto = args.upto.min(symbols.len());
    let prefix = &symbols[..upto];

    let mut p = UserPipeline::new(PredictorKind::VoBrm, cfg.pipeline.clone(), alphabet, rates)
        .map_err(CliError::config)?;
    for &x in prefix {
        p.step(x).map_err(CliError::input)?;
    }

    let mut out = String::new();
    let _ = writeln!(out, "# user {} position {upto} of {}", trace.user_id, symbols.len());
    let (label, dump) = match args.tree {
        TreeView::Lezi => {
            let (tree, _) = FrequencyTree::active_lezi_from(alphabet, prefix).map_err(CliError::input)?;
            ("active-lezi".to_string(), tree.dump())
        }
        TreeView::Ppm => (format!("ppm depth {}", cfg.pipeline.tree_depth), p.tree().dump()),
    };
    let _ = writeln!(out, "# tree {label}");
    out.push_str(&dump);

    let est = p.estimate();
    let ipred = est.ipred();
    let lc = mcspredict_core::learning_curve(&ipred);
    let _ = writeln!(out, "# ipred over {} positions", est.n_used());
    out.push_str("k,ipred_bits,learning_curve\n");
    for (k, (i, l)) in ipred.iter().zip(&lc).enumerate() {
        let _ = writeln!(out, "{},{i},{l}", k + 1);
    }
    let k_opt = mcspredict_core::k_opt(&lc, cfg.pipeline.epsilon).map_err(CliError::config)?;
    let _ = writeln!(out, "# k_opt from current estimate: {k_opt}");
    match p.last_update() {
        Some(u) => {
            let fresh = if u.at == upto { " (selected at this position)" } else { "" };
            let _ = writeln!(out, "# criteria at position {}{fresh}, k_opt {}", u.at, u.k_opt);
            let _ = writeln!(out, "{}", mcspredict_core::CriterionReport::CSV_HEADER);
            out.push_str(&u.report.to_csv_rows(&trace.user_id));
        }
        None => {
            let _ = writeln!(out, "# no order selection yet");
        }
    }
    let _ = writeln!(out, "# selected order: {}", p.selected_order());
    Ok(out)
}
