//! Decision rules and the per-user online pipeline.
//!
//! Given the blended next-symbol distribution, the MAP rule picks the most
//! likely symbol while the Bayesian risk minimiser (BRM) picks the symbol with
//! the smallest expected rate loss: transmitting above the true rate loses
//! the whole true rate, transmitting below it loses the difference.
//!
//! [`UserPipeline`] replays one user's feedback sequence. Each step emits a
//! prediction from the state built on earlier symbols only, then ingests the
//! new symbol. Variable-order (VO) predictors run at order 1 until the
//! bootstrap length and then re-select their order every `recompute_period`
//! symbols; fixed-Markov (FM) predictors always blend at a fixed order.

use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, RateTable, Symbol};
use crate::blend;
use crate::complexity::{self, PredictiveInfoEstimate, DEFAULT_EPSILON, DEFAULT_MAX_ORDER};
use crate::error::{Error, Result};
use crate::freq_tree::FrequencyTree;
use crate::order_select::{self, Criterion, CriterionReport, ParamCount, SampleMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PredictorKind {
    #[serde(rename = "vo_map")]
    VoMap,
    #[serde(rename = "vo_brm")]
    VoBrm,
    #[serde(rename = "fm_map")]
    FmMap,
    #[serde(rename = "fm_brm")]
    FmBrm,
    #[serde(rename = "median")]
    Median,
    #[serde(rename = "no_prediction")]
    NoPrediction,
}

impl PredictorKind {
    pub const ALL: [PredictorKind; 6] = [
        PredictorKind::VoMap,
        PredictorKind::VoBrm,
        PredictorKind::FmMap,
        PredictorKind::FmBrm,
        PredictorKind::Median,
        PredictorKind::NoPrediction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PredictorKind::VoMap => "vo_map",
            PredictorKind::VoBrm => "vo_brm",
            PredictorKind::FmMap => "fm_map",
            PredictorKind::FmBrm => "fm_brm",
            PredictorKind::Median => "median",
            PredictorKind::NoPrediction => "no_prediction",
        }
    }

    pub fn is_variable_order(self) -> bool {
        matches!(self, PredictorKind::VoMap | PredictorKind::VoBrm)
    }

    pub fn is_fixed_markov(self) -> bool {
        matches!(self, PredictorKind::FmMap | PredictorKind::FmBrm)
    }

    pub fn uses_brm(self) -> bool {
        matches!(self, PredictorKind::VoBrm | PredictorKind::FmBrm)
    }
}

impl std::fmt::Display for PredictorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PredictorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PredictorKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::domain(format!("unknown predictor `{s}`")))
    }
}

/// Most probable symbol; ties go to the lower symbol.
pub fn predict_map(dist: &[f64]) -> Symbol {
    let mut best = 0;
    for (s, &p) in dist.iter().enumerate() {
        if p > dist[best] {
            best = s;
        }
    }
    best as Symbol
}

/// Expected cost `C_j = sum_i C_ij P(i)` of transmitting at each rate `j`,
/// with `C_ij = r_i` when `r_i < r_j` and `r_i - r_j` otherwise.
pub fn expected_costs(dist: &[f64], rates: &RateTable) -> Vec<f64> {
    let r = rates.as_slice();
    (0..dist.len())
        .map(|j| {
            dist.iter()
                .enumerate()
                .filter(|&(_, &p)| p > 0.0)
                .map(|(i, &p)| p * if r[i] < r[j] { r[i] } else { r[i] - r[j] })
                .sum()
        })
        .collect()
}

/// Symbol with the least expected cost over the whole alphabet; ties go to
/// the lower symbol.
pub fn predict_brm(dist: &[f64], rates: &RateTable) -> Symbol {
    let costs = expected_costs(dist, rates);
    let mut best = 0;
    for (j, &c) in costs.iter().enumerate() {
        if c < costs[best] {
            best = j;
        }
    }
    best as Symbol
}

/// Median of the last `min(window, len)` values; lower middle for even counts.
pub fn predict_median(history: &[Symbol], window: usize) -> Option<Symbol> {
    if history.is_empty() || window == 0 {
        return None;
    }
    let mut w = history[history.len().saturating_sub(window)..].to_vec();
    w.sort_unstable();
    Some(w[(w.len() - 1) / 2])
}

pub fn predict_last(history: &[Symbol]) -> Option<Symbol> {
    history.last().copied()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub tree_depth: usize,
    /// Largest candidate order `K`.
    pub max_order: usize,
    pub epsilon: f64,
    pub criterion: Criterion,
    pub sample_mode: SampleMode,
    pub param_count: ParamCount,
    pub recompute_period: usize,
    pub bootstrap_len: usize,
    pub median_window: usize,
    pub fm_order: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            tree_depth: 5,
            max_order: DEFAULT_MAX_ORDER,
            epsilon: DEFAULT_EPSILON,
            criterion: Criterion::Aicc,
            sample_mode: SampleMode::Transitions,
            param_count: ParamCount::Chain,
            recompute_period: 100,
            bootstrap_len: 100,
            median_window: 9,
            fm_order: 3,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_order == 0 || self.tree_depth < self.max_order + 1 {
            return Err(Error::domain(format!(
                "tree depth {} must be at least max order + 1 = {}",
                self.tree_depth,
                self.max_order + 1
            )));
        }
        if self.tree_depth < self.fm_order + 1 {
            return Err(Error::domain(format!("tree depth {} too shallow for FM order {}", self.tree_depth, self.fm_order)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::domain("epsilon must be positive"));
        }
        if self.recompute_period == 0 {
            return Err(Error::domain("recompute period must be positive"));
        }
        if self.median_window == 0 {
            return Err(Error::domain("median window must be positive"));
        }
        Ok(())
    }
}

/// What one pipeline step emitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutput {
    pub predicted: Symbol,
    /// No history was available; excluded from metrics.
    pub cold: bool,
    /// Blending order behind the prediction; 0 for the baselines.
    pub order_used: usize,
}

/// Order-selection outcome at a recompute point.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderUpdate {
    pub at: usize,
    pub ipred: Vec<f64>,
    pub learning_curve: Vec<f64>,
    pub k_opt: usize,
    pub order: usize,
    pub report: CriterionReport,
}

#[derive(Debug, Clone)]
pub struct UserPipeline {
    kind: PredictorKind,
    cfg: PipelineConfig,
    rates: RateTable,
    tree: FrequencyTree,
    history: Vec<Symbol>,
    estimate: PredictiveInfoEstimate,
    order: usize,
    last_update: Option<OrderUpdate>,
    scratch: Vec<f64>,
}

impl UserPipeline {
    pub fn new(kind: PredictorKind, cfg: PipelineConfig, alphabet: Alphabet, rates: RateTable) -> Result<Self> {
        cfg.validate()?;
        if rates.len() != alphabet.size() {
            return Err(Error::domain(format!(
                "rate table has {} entries for an alphabet of {}",
                rates.len(),
                alphabet.size()
            )));
        }
        Ok(Self {
            kind,
            tree: FrequencyTree::ppm(alphabet, cfg.tree_depth)?,
            estimate: PredictiveInfoEstimate::new(cfg.max_order, alphabet.size())?,
            history: Vec::new(),
            order: 1,
            last_update: None,
            scratch: vec![0.0; alphabet.size()],
            cfg,
            rates,
        })
    }

    pub fn kind(&self) -> PredictorKind {
        self.kind
    }

    pub fn tree(&self) -> &FrequencyTree {
        &self.tree
    }

    pub fn history(&self) -> &[Symbol] {
        &self.history
    }

    pub fn estimate(&self) -> &PredictiveInfoEstimate {
        &self.estimate
    }

    /// Order a VO predictor currently blends at (before clipping to history).
    pub fn selected_order(&self) -> usize {
        self.order
    }

    pub fn last_update(&self) -> Option<&OrderUpdate> {
        self.last_update.as_ref()
    }

    /// Blending order the next prediction will use, or `None` for the
    /// baselines and before any history exists.
    pub fn next_order(&self) -> Option<usize> {
        if self.history.is_empty() {
            return None;
        }
        let target = match self.kind {
            k if k.is_variable_order() => self.order,
            k if k.is_fixed_markov() => self.cfg.fm_order,
            _ => return None,
        };
        Some(target.min(self.history.len()))
    }

    /// The distribution the next VO/FM prediction is drawn from, with its order.
    pub fn predictive_distribution(&self) -> Option<(Vec<f64>, usize)> {
        let k = self.next_order()?;
        let ctx = &self.history[self.history.len() - k..];
        blend::distribution(&self.tree, ctx).ok().map(|d| (d, k))
    }

    fn predict(&mut self) -> StepOutput {
        if self.history.is_empty() {
            return StepOutput { predicted: 0, cold: true, order_used: 0 };
        }
        let (predicted, order_used) = match self.kind {
            PredictorKind::Median => (predict_median(&self.history, self.cfg.median_window).unwrap_or(0), 0),
            PredictorKind::NoPrediction => (predict_last(&self.history).unwrap_or(0), 0),
            kind => {
                let k = self.next_order().unwrap_or(0);
                let ctx = &self.history[self.history.len() - k..];
                blend::distribution_into(&self.tree, ctx, &mut self.scratch)
                    .expect("pipeline tree depth validated against blending order");
                let s = if kind.uses_brm() { predict_brm(&self.scratch, &self.rates) } else { predict_map(&self.scratch) };
                (s, k)
            }
        };
        StepOutput { predicted, cold: false, order_used }
    }

    /// Predicts the value at this position from earlier symbols, then
    /// ingests `x_new`.
    pub fn step(&mut self, x_new: Symbol) -> Result<StepOutput> {
        self.tree.alphabet().check(x_new)?;
        let out = self.predict();
        self.tree.ppm_ingest(&self.history, x_new)?;
        self.history.push(x_new);
        if self.kind.is_variable_order() {
            self.estimate.update(&self.tree, &self.history)?;
            let n = self.history.len();
            if n >= self.cfg.bootstrap_len && n % self.cfg.recompute_period == 0 {
                self.reselect_order()?;
            }
        }
        Ok(out)
    }

    /// Recomputes the order upper bound from the learning curve and selects
    /// the blending order under it.
    pub fn reselect_order(&mut self) -> Result<&OrderUpdate> {
        let ipred = self.estimate.ipred();
        let lc = complexity::learning_curve(&ipred);
        let k_opt = complexity::k_opt(&lc, self.cfg.epsilon)?.min(self.cfg.tree_depth - 1);
        let (order, report) = order_select::select_order(
            &self.history,
            &self.tree,
            k_opt,
            self.cfg.criterion,
            self.cfg.sample_mode,
            self.cfg.param_count,
        )?;
        self.order = order;
        self.last_update = Some(OrderUpdate { at: self.history.len(), ipred, learning_curve: lc, k_opt, order, report });
        Ok(self.last_update.as_ref().expect("just set"))
    }
}
