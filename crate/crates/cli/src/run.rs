//! Batch replay of every user through every selected predictor.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use mcspredict_core::metrics::quantile;
use mcspredict_core::{
    cdf, Alphabet, CriterionReport, PipelineConfig, PredictorKind, RateTable, Symbol, Trace, UserMetrics,
    UserPipeline,
};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const CDF_FILE: &str = "cdf.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const CRITERIA_FILE: &str = "criteria.csv";
pub const ORDERS_FILE: &str = "orders.csv";

/// Outcome of one predictor on one user.
#[derive(Debug, Clone)]
pub struct UserRun {
    pub predictor: PredictorKind,
    pub metrics: UserMetrics,
    /// `(t, actual, predicted, order_used)` for every scored step.
    pub steps: Vec<(u64, Symbol, Symbol, usize)>,
    /// `(position, k_opt, order)` at each order selection.
    pub orders: Vec<(usize, usize, usize)>,
    pub final_report: Option<CriterionReport>,
}

#[derive(Debug, Clone)]
pub struct UserResult {
    pub user_id: String,
    pub runs: Vec<UserRun>,
}

/// Per-predictor percentile row of the summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub predictor: PredictorKind,
    pub users: usize,
    pub p_loss_p50: f64,
    pub p_loss_p90: f64,
    pub r_eff_p50: f64,
    /// Fraction of users with rate efficiency of at least 0.9.
    pub r_eff_ge_090: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub users: Vec<UserResult>,
    pub summary: Vec<SummaryRow>,
    pub files: Vec<PathBuf>,
}

impl RunOutput {
    /// `(user_id, metrics)` for one predictor in user order.
    pub fn metrics_of(&self, kind: PredictorKind) -> Vec<(&str, UserMetrics)> {
        self.users
            .iter()
            .filter_map(|u| u.runs.iter().find(|r| r.predictor == kind).map(|r| (u.user_id.as_str(), r.metrics)))
            .collect()
    }

    pub fn summary_of(&self, kind: PredictorKind) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.predictor == kind)
    }
}

/// Replays one trace through one predictor.
pub fn replay_user(
    trace: &Trace,
    kind: PredictorKind,
    pipeline: &PipelineConfig,
    alphabet: Alphabet,
    rates: &RateTable,
) -> CliResult<UserRun> {
    if trace.len() < 2 {
        return Err(CliError::Input(format!("user {} has fewer than two samples", trace.user_id)));
    }
    let mut p = UserPipeline::new(kind, pipeline.clone(), alphabet, rates.clone()).map_err(CliError::config)?;
    let mut steps = Vec::with_capacity(trace.len());
    let mut orders = Vec::new();
    for &(t, x) in &trace.samples {
        let out = p.step(x).map_err(|e| CliError::Input(format!("user {}: {e}", trace.user_id)))?;
        if !out.cold {
            steps.push((t, x, out.predicted, out.order_used));
        }
        if let Some(u) = p.last_update() {
            if u.at == p.history().len() {
                orders.push((u.at, u.k_opt, u.order));
            }
        }
    }
    let actual: Vec<Symbol> = steps.iter().map(|s| s.1).collect();
    let predicted: Vec<Symbol> = steps.iter().map(|s| s.2).collect();
    let metrics = UserMetrics::compute(&actual, &predicted, rates).map_err(CliError::input)?;
    Ok(UserRun { predictor: kind, metrics, steps, orders, final_report: p.last_update().map(|u| u.report.clone()) })
}

/// Runs the batch and computes the summary without touching the filesystem.
pub fn compute(cfg: &RunConfig) -> CliResult<(Vec<UserResult>, Vec<SummaryRow>)> {
    let (rates, traces) = cfg.load_inputs()?;
    let alphabet = Alphabet::new(rates.len()).map_err(CliError::input)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    // Indexed collection keeps user order regardless of completion order.
    let users: Vec<UserResult> = pool.install(|| {
        traces
            .par_iter()
            .map(|trace| {
                let runs = cfg
                    .predictors
                    .iter()
                    .map(|&k| replay_user(trace, k, &cfg.pipeline, alphabet, &rates))
                    .collect::<CliResult<Vec<_>>>()?;
                Ok(UserResult { user_id: trace.user_id.clone(), runs })
            })
            .collect::<CliResult<Vec<_>>>()
    })?;
    let summary = cfg
        .predictors
        .iter()
        .enumerate()
        .map(|(j, &k)| summarise(k, users.iter().map(|u| u.runs[j].metrics)))
        .collect::<CliResult<Vec<_>>>()?;
    Ok((users, summary))
}

fn summarise(predictor: PredictorKind, metrics: impl Iterator<Item = UserMetrics>) -> CliResult<SummaryRow> {
    let (pl, re): (Vec<f64>, Vec<f64>) = metrics.map(|m| (m.p_loss, m.r_eff)).unzip();
    let q = |v: &[f64], q: f64| quantile(v, q).map_err(CliError::input);
    Ok(SummaryRow {
        predictor,
        users: pl.len(),
        p_loss_p50: q(&pl, 0.5)?,
        p_loss_p90: q(&pl, 0.9)?,
        r_eff_p50: q(&re, 0.5)?,
        r_eff_ge_090: re.iter().filter(|&&r| r >= 0.9).count() as f64 / re.len() as f64,
    })
}

/// Full run: compute, then write every report into the output directory.
/// On failure nothing this run created is left behind.
pub fn run(cfg: &RunConfig) -> CliResult<RunOutput> {
    let (users, summary) = compute(cfg)?;
    let mut writer = OutputWriter::new(&cfg.output_dir)?;
    match write_reports(&mut writer, cfg, &users, &summary) {
        Ok(()) => Ok(RunOutput { users, summary, files: writer.created }),
        Err(e) => {
            writer.rollback();
            Err(e)
        }
    }
}

struct OutputWriter {
    dir: PathBuf,
    made_dir: bool,
    created: Vec<PathBuf>,
}

impl OutputWriter {
    fn new(dir: &Path) -> CliResult<Self> {
        let made_dir = !dir.exists();
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), made_dir, created: Vec::new() })
    }

    fn write(&mut self, name: &str, body: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        self.created.push(path.clone());
        fs::write(&path, body)?;
        Ok(())
    }

    fn rollback(&self) {
        for p in &self.created {
            let _ = fs::remove_file(p);
        }
        if self.made_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

fn write_reports(w: &mut OutputWriter, cfg: &RunConfig, users: &[UserResult], summary: &[SummaryRow]) -> CliResult<()> {
    w.write(METRICS_FILE, &metrics_csv(&cfg.predictors, users))?;
    w.write(CDF_FILE, &cdf_csv(&cfg.predictors, users)?)?;
    w.write(SUMMARY_FILE, &summary_csv(summary))?;
    if cfg.predictors.iter().any(|k| k.is_variable_order()) {
        w.write(CRITERIA_FILE, &criteria_csv(users))?;
        w.write(ORDERS_FILE, &orders_csv(users))?;
    }
    if cfg.log_predictions {
        w.write(PREDICTIONS_FILE, &predictions_csv(users))?;
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn predictions_csv(users: &[UserResult]) -> String {
    let mut out = String::from("user_id,t,actual,predicted,predictor,order_used\n");
    for u in users {
        let id = csv_field(&u.user_id);
        for r in &u.runs {
            for &(t, a, p, k) in &r.steps {
                let _ = writeln!(out, "{id},{t},{a},{p},{},{k}", r.predictor);
            }
        }
    }
    out
}

pub fn metrics_csv(predictors: &[PredictorKind], users: &[UserResult]) -> String {
    let mut out = String::from("user_id,predictor,p_loss,r_eff,packets\n");
    for (j, k) in predictors.iter().enumerate() {
        for u in users {
            let m = u.runs[j].metrics;
            let _ = writeln!(out, "{},{k},{},{},{}", csv_field(&u.user_id), m.p_loss, m.r_eff, m.packets);
        }
    }
    out
}

pub fn cdf_csv(predictors: &[PredictorKind], users: &[UserResult]) -> CliResult<String> {
    let mut out = String::from("predictor,metric,value,cum_fraction\n");
    for (j, k) in predictors.iter().enumerate() {
        for (name, pick) in [("p_loss", 0), ("r_eff", 1)] {
            let values: Vec<f64> = users
                .iter()
                .map(|u| if pick == 0 { u.runs[j].metrics.p_loss } else { u.runs[j].metrics.r_eff })
                .collect();
            for (v, f) in cdf(&values).map_err(CliError::input)? {
                let _ = writeln!(out, "{k},{name},{v},{f}");
            }
        }
    }
    Ok(out)
}

pub fn summary_csv(summary: &[SummaryRow]) -> String {
    let mut out = String::from("predictor,users,p_loss_p50,p_loss_p90,r_eff_p50,frac_r_eff_ge_0.9\n");
    for r in summary {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.predictor, r.users, r.p_loss_p50, r.p_loss_p90, r.r_eff_p50, r.r_eff_ge_090
        );
    }
    out
}

/// Last criterion report of each user's first VO predictor.
pub fn criteria_csv(users: &[UserResult]) -> String {
    let mut out = format!("{}\n", CriterionReport::CSV_HEADER);
    for u in users {
        let report = u.runs.iter().find(|r| r.predictor.is_variable_order()).and_then(|r| r.final_report.as_ref());
        if let Some(rep) = report {
            out.push_str(&rep.to_csv_rows(&csv_field(&u.user_id)));
        }
    }
    out
}

pub fn orders_csv(users: &[UserResult]) -> String {
    let mut out = String::from("user_id,position,k_opt,order\n");
    for u in users {
        if let Some(r) = u.runs.iter().find(|r| r.predictor.is_variable_order()) {
            for &(at, k_opt, order) in &r.orders {
                let _ = writeln!(out, "{},{at},{k_opt},{order}", csv_field(&u.user_id));
            }
        }
    }
    out
}

/// Plain-text percentile table for the terminal.
pub fn summary_table(summary: &[SummaryRow]) -> String {
    let mut out = format!(
        "{:<14} {:>6} {:>10} {:>10} {:>10} {:>12}\n",
        "predictor", "users", "p_loss@50", "p_loss@90", "r_eff@50", "r_eff>=0.9"
    );
    for r in summary {
        let _ = writeln!(
            out,
            "{:<14} {:>6} {:>10.4} {:>10.4} {:>10.4} {:>12.3}",
            r.predictor.name(),
            r.users,
            r.p_loss_p50,
            r.p_loss_p90,
            r.r_eff_p50,
            r.r_eff_ge_090
        );
    }
    out
}
