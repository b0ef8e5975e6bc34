//! Forward search guided by the relaxed-plan heuristic.
//!
//! Speed mode runs enforced hill-climbing restricted to helpful actions,
//! continues without the restriction from the state where that got stuck,
//! and finally falls back to a complete greedy best-first search from the
//! initial state. Quality mode turns the metric into action costs and runs
//! weighted A*.

mod best_first;
mod costs;
mod ehc;
mod heuristic;
mod visited;

use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::lnf::{check_acyclic, compute_relevance, LnfTask};
use crate::model::{GroundTask, Plan};
use crate::rational::{int, ExtRational, Rational};
use crate::rpg::DEFAULT_MAX_LAYERS;

use best_first::BestFirst;
pub use costs::{derive_costs, Rejected};
pub use ehc::EhcFailure;
pub use heuristic::{heuristic, Evaluation, Heuristic};
pub use visited::{dominated_by, VisitedTable};

pub const DEFAULT_MAX_EXPANSIONS: usize = 1_000_000;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Speed,
    Quality,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostWeights {
    pub w_g: Rational,
    pub w_h: Rational,
}

impl Default for CostWeights {
    fn default() -> Self {
        CostWeights { w_g: Rational::one(), w_h: int(5) }
    }
}

impl CostWeights {
    pub fn new(w_g: Rational, w_h: Rational) -> Result<Self, String> {
        if w_g < Rational::zero() || w_h < Rational::zero() {
            return Err("weights must be non-negative".into());
        }
        if w_g.is_zero() && w_h.is_zero() {
            return Err("weights must not both be zero".into());
        }
        Ok(CostWeights { w_g, w_h })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub mode: Mode,
    pub weights: CostWeights,
    /// Per search stage.
    pub max_expansions: usize,
    pub max_layers: usize,
    /// Restrict the first hill-climbing stage to helpful actions.
    pub helpful_pruning: bool,
    /// Weight of the relaxed plan length added to the cost heuristic in
    /// quality mode.
    pub h_mix: Rational,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            mode: Mode::Speed,
            weights: CostWeights::default(),
            max_expansions: DEFAULT_MAX_EXPANSIONS,
            max_layers: DEFAULT_MAX_LAYERS,
            helpful_pruning: true,
            h_mix: Rational::zero(),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("the relaxation is unsolvable")]
    DeadEnd,
    #[error("search space exhausted")]
    Exhausted,
    #[error("expansion limit reached")]
    ExpansionCap,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Stage {
    Ehc,
    EhcNoPruning,
    Gbfs,
    Wastar,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Ehc => "ehc",
            Stage::EhcNoPruning => "ehc-no-pruning",
            Stage::Gbfs => "gbfs",
            Stage::Wastar => "wastar",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub expansions: usize,
    pub evaluations: usize,
}

/// How the metric was turned into costs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CostModel {
    /// Speed mode was requested.
    NotUsed,
    NoMetric,
    Accepted(Vec<Rational>),
    Rejected(Rejected),
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    /// Plan over the actions of the normalized task.
    pub plan: Option<Plan>,
    /// Stage that produced the plan, or the last stage tried.
    pub stage: Stage,
    pub stats: SearchStats,
    pub h_init: ExtRational,
    pub cost_model: CostModel,
    /// Metric value of the state reached by the plan.
    pub metric: Option<Rational>,
    /// Set when assignments are cyclic: dead-end detection and the relaxed
    /// deciders are then without guarantee.
    pub guarantees_void: bool,
    pub failure: Option<SearchError>,
}

impl SolveOutcome {
    pub fn solved(&self) -> bool {
        self.plan.is_some()
    }

    /// `stage=.. expansions=.. evals=.. h_init=.. length=.. metric=..`
    pub fn stats_line(&self) -> String {
        format!(
            "stage={} expansions={} evals={} h_init={} length={} metric={}",
            self.stage,
            self.stats.expansions,
            self.stats.evaluations,
            self.h_init,
            self.plan.as_ref().map_or("-".to_string(), |p| p.len().to_string()),
            self.metric.as_ref().map_or("-".to_string(), |m| m.to_string()),
        )
    }
}

fn speed_heuristic<'a>(t: &'a LnfTask, config: &SearchConfig) -> Heuristic<'a> {
    Heuristic::new(t).with_max_layers(config.max_layers)
}

/// Enforced hill-climbing from the initial state.
pub fn ehc(t: &LnfTask, config: &SearchConfig) -> Result<Plan, Box<EhcFailure>> {
    let h = speed_heuristic(t, config);
    let rv = compute_relevance(t);
    let eval = h.evaluate(&t.init);
    let mut stats = SearchStats::default();
    ehc::ehc_from(&h, &rv, t.init.clone(), eval, Vec::new(), config.helpful_pruning, &mut stats, config.max_expansions)
        .map(Plan::new)
}

/// Greedy best-first search on `h` with dominance-based duplicate detection.
pub fn gbfs(t: &LnfTask, config: &SearchConfig) -> Result<Plan, SearchError> {
    let h = speed_heuristic(t, config);
    let rv = compute_relevance(t);
    gbfs_with(&h, &rv, config, &mut SearchStats::default())
}

fn gbfs_with(
    h: &Heuristic,
    rv: &crate::lnf::RelevanceSet,
    config: &SearchConfig,
    stats: &mut SearchStats,
) -> Result<Plan, SearchError> {
    BestFirst {
        heuristic: h,
        rv,
        w_g: Rational::zero(),
        w_h: Rational::one(),
        costs: None,
        max_expansions: config.max_expansions,
        early_goal: true,
    }
    .run(&h.task().init, stats)
    .map(Plan::new)
}

/// Weighted A* on `f = w_g·g + w_h·h` where `g` sums `costs` and `h` is the
/// cost of the relaxed plan.
pub fn wastar(t: &LnfTask, costs: &[Rational], w: &CostWeights, config: &SearchConfig) -> Result<Plan, SearchError> {
    let h = Heuristic::new(t).with_max_layers(config.max_layers).with_costs(costs.to_vec(), config.h_mix.clone());
    let rv = compute_relevance(t);
    wastar_with(&h, &rv, costs, w, config, &mut SearchStats::default())
}

fn wastar_with(
    h: &Heuristic,
    rv: &crate::lnf::RelevanceSet,
    costs: &[Rational],
    w: &CostWeights,
    config: &SearchConfig,
    stats: &mut SearchStats,
) -> Result<Plan, SearchError> {
    BestFirst {
        heuristic: h,
        rv,
        w_g: w.w_g.clone(),
        w_h: w.w_h.clone(),
        costs: Some(costs),
        max_expansions: config.max_expansions,
        early_goal: false,
    }
    .run(&h.task().init, stats)
    .map(Plan::new)
}

fn speed(t: &LnfTask, config: &SearchConfig, stats: &mut SearchStats) -> (Result<Plan, SearchError>, Stage, ExtRational) {
    let h = speed_heuristic(t, config);
    let rv = compute_relevance(t);
    let eval = h.evaluate(&t.init);
    stats.evaluations += 1;
    let h_init = eval.h.clone();
    let first = if config.helpful_pruning { Stage::Ehc } else { Stage::EhcNoPruning };
    let stuck = match ehc::ehc_from(
        &h,
        &rv,
        t.init.clone(),
        eval,
        Vec::new(),
        config.helpful_pruning,
        stats,
        config.max_expansions,
    ) {
        Ok(p) => return (Ok(Plan::new(p)), first, h_init),
        Err(f) => f,
    };
    if config.helpful_pruning && stuck.error != SearchError::DeadEnd {
        let EhcFailure { state, eval, prefix, .. } = *stuck;
        if let Ok(p) = ehc::ehc_from(&h, &rv, state, eval, prefix, false, stats, config.max_expansions) {
            return (Ok(Plan::new(p)), Stage::EhcNoPruning, h_init);
        }
    }
    (gbfs_with(&h, &rv, config, stats), Stage::Gbfs, h_init)
}

/// Runs the planner on a normalized task.
pub fn solve(t: &LnfTask, config: &SearchConfig) -> SolveOutcome {
    let guarantees_void = !check_acyclic(t).acyclic;
    let mut stats = SearchStats::default();
    let cost_model = match (config.mode, &t.metric) {
        (Mode::Speed, _) => CostModel::NotUsed,
        (Mode::Quality, None) => CostModel::NoMetric,
        (Mode::Quality, Some(m)) => match derive_costs(t, m) {
            Ok(c) => CostModel::Accepted(c),
            Err(r) => CostModel::Rejected(r),
        },
    };
    let (result, stage, h_init) = match &cost_model {
        CostModel::Accepted(costs) => {
            let h = Heuristic::new(t).with_max_layers(config.max_layers).with_costs(costs.clone(), config.h_mix.clone());
            let rv = compute_relevance(t);
            let h_init = h.evaluate(&t.init).h;
            stats.evaluations += 1;
            (wastar_with(&h, &rv, costs, &config.weights, config, &mut stats), Stage::Wastar, h_init)
        }
        _ => speed(t, config, &mut stats),
    };
    let (plan, failure) = match result {
        Ok(p) => (Some(p), None),
        Err(e) => (None, Some(e)),
    };
    let metric = plan.as_ref().and_then(|p| {
        let mut s = t.init.clone();
        for a in &p.steps {
            s = t.apply(&s, *a).ok()?;
        }
        t.metric_value(&s)
    });
    SolveOutcome { plan, stage, stats, h_init, cost_model, metric, guarantees_void, failure }
}
