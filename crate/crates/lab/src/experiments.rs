//! Desk-scale experiments: runtime scaling, confinement rates, critical
//! position dynamics and the cGA/UMDA comparison.
//!
//! Every table is a pure function of its configuration and seed. Trial `i`
//! of any experiment uses stream `i`, whatever thread runs it.

use std::fmt;
use std::str::FromStr;

use edalab_core::cga::{run_cga, run_cga_past_optimum, RunResult, TraceRecord};
use edalab_core::model::{make_well_behaved, WellBehavedMu};
use edalab_core::umda::{run_umda, UmdaParams, UmdaRunResult};
use edalab_core::{Benchmark, Error};
use rayon::prelude::*;
use serde::Serialize;

use crate::stats::{mean, median_iqr, ols, quantile_sorted, LinearFit};

/// Growth term of a [`Rule`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleForm {
    /// `n * ln(n)^2`
    NLnSquaredN,
    /// `n * ln(n)`
    NLnN,
    /// `mu * n * ln(n)`, budgets only.
    MuNLnN,
}

impl RuleForm {
    fn as_str(self) -> &'static str {
        match self {
            RuleForm::NLnSquaredN => "n*ln2n",
            RuleForm::NLnN => "n*lnn",
            RuleForm::MuNLnN => "mu*n*lnn",
        }
    }
}

/// `coefficient * form`, written like `2*n*ln2n` or `24*mu*n*lnn`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rule {
    pub coefficient: f64,
    pub form: RuleForm,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rule {rule:?}: {reason}")]
pub struct RuleParseError {
    pub rule: String,
    pub reason: &'static str,
}

impl Rule {
    pub fn new(coefficient: f64, form: RuleForm) -> Self {
        Self { coefficient, form }
    }

    pub fn needs_mu(&self) -> bool {
        self.form == RuleForm::MuNLnN
    }

    /// Value at problem size `n`; `mu` is only read by `mu*n*lnn`.
    pub fn value(&self, n: usize, mu: f64) -> f64 {
        let n = n as f64;
        let ln = n.ln();
        self.coefficient
            * match self.form {
                RuleForm::NLnSquaredN => n * ln * ln,
                RuleForm::NLnN => n * ln,
                RuleForm::MuNLnN => mu * n * ln,
            }
    }

    /// Rounded to the nearest evaluation count.
    pub fn budget(&self, n: usize, mu: f64) -> u64 {
        self.value(n, mu).round() as u64
    }
}

impl FromStr for Rule {
    type Err = RuleParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason| RuleParseError {
            rule: s.to_owned(),
            reason,
        };
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let (coefficient, rest) = compact
            .split_once('*')
            .ok_or_else(|| err("expected <c>*<form>"))?;
        let coefficient: f64 = coefficient
            .parse()
            .map_err(|_| err("coefficient is not a number"))?;
        if !coefficient.is_finite() || coefficient <= 0.0 {
            return Err(err("coefficient must be positive"));
        }
        let form = [RuleForm::NLnSquaredN, RuleForm::NLnN, RuleForm::MuNLnN]
            .into_iter()
            .find(|f| f.as_str() == rest)
            .ok_or_else(|| err("form must be n*ln2n, n*lnn or mu*n*lnn"))?;
        Ok(Rule { coefficient, form })
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*{}", self.coefficient, self.form.as_str())
    }
}

impl Serialize for Rule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Rule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn check_mu_rule(rule: &Rule) -> Result<(), Error> {
    if rule.needs_mu() {
        return Err(Error::InvalidParameter {
            name: "mu_rule",
            reason: "a population-size rule cannot depend on mu",
        });
    }
    Ok(())
}

/// Snapped population size for `n` under `mu_rule`.
pub fn resolve_mu(n: usize, mu_rule: &Rule) -> Result<WellBehavedMu, Error> {
    check_mu_rule(mu_rule)?;
    make_well_behaved(n, mu_rule.value(n, 0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingConfig {
    pub benchmark: Benchmark,
    pub n_grid: Vec<usize>,
    pub mu_rule: Rule,
    pub budget_rule: Rule,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub target_mu: f64,
    pub mu: f64,
    pub budget: u64,
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    /// Over successful runs only.
    pub median_evals: Option<f64>,
    pub iqr_lo: Option<f64>,
    pub iqr_hi: Option<f64>,
    pub mean_evals: Option<f64>,
    /// Over runs that reached the all-high state.
    pub mean_first_all_high: Option<f64>,
    pub below_quarter_rate: f64,
    /// Successful runs that reached the all-high state.
    pub reached_all_high: u64,
    /// Successful runs that reached the all-high state and kept it.
    pub stayed_high: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// Fit of `ln(median_evals)` against `ln(n)`; present when at least
    /// three sizes had successes.
    pub fit: Option<LinearFit>,
    #[serde(skip)]
    pub runs: Vec<Vec<RunResult>>,
}

/// Runs `trials` independent cGA runs at `params` with trial `i` on stream `i`.
pub fn cga_trials(
    params: edalab_core::ModelParams,
    benchmark: Benchmark,
    budget: u64,
    trials: u64,
    seed: u64,
    trace_every: u64,
) -> Vec<RunResult> {
    (0..trials)
        .into_par_iter()
        .map(|i| run_cga(params, &benchmark, budget, seed, i, trace_every))
        .collect()
}

pub fn scaling_experiment(cfg: &ScalingConfig) -> Result<ScalingReport, Error> {
    check_mu_rule(&cfg.mu_rule)?;
    let mut grid = cfg.n_grid.clone();
    grid.sort_unstable();
    grid.dedup();
    let mut rows = Vec::with_capacity(grid.len());
    let mut runs = Vec::with_capacity(grid.len());
    for &n in &grid {
        let wb = resolve_mu(n, &cfg.mu_rule)?;
        let mu = wb.params.mu();
        let budget = cfg.budget_rule.budget(n, mu);
        // Only the initial and final states are traced; the exact run
        // statistics cover everything the table needs.
        let results = cga_trials(wb.params, cfg.benchmark, budget, cfg.trials, cfg.seed, u64::MAX);
        rows.push(scaling_row(n, wb, budget, &results));
        runs.push(results);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|r| r.median_evals.map(|m| ((r.n as f64).ln(), m.ln())))
        .unzip();
    let fit = if xs.len() >= 3 { ols(&xs, &ys) } else { None };
    Ok(ScalingReport { rows, fit, runs })
}

fn scaling_row(n: usize, wb: WellBehavedMu, budget: u64, results: &[RunResult]) -> ScalingRow {
    let hits: Vec<f64> = results
        .iter()
        .filter_map(|r| r.hit_time_evals.map(|h| h as f64))
        .collect();
    let summary = median_iqr(&hits);
    let all_high: Vec<f64> = results
        .iter()
        .filter_map(|r| r.first_all_high_iter.map(|t| t as f64))
        .collect();
    let successes = results.iter().filter(|r| r.success);
    let stay: Vec<StayHigh> = successes.clone().map(stay_high_analysis).collect();
    ScalingRow {
        n,
        target_mu: wb.target_mu,
        mu: wb.params.mu(),
        budget,
        trials: results.len() as u64,
        successes: successes.count() as u64,
        success_rate: if results.is_empty() {
            0.0
        } else {
            hits.len() as f64 / results.len() as f64
        },
        median_evals: summary.map(|s| s.0),
        iqr_lo: summary.map(|s| s.1),
        iqr_hi: summary.map(|s| s.2),
        mean_evals: mean(&hits),
        mean_first_all_high: mean(&all_high),
        below_quarter_rate: below_quarter_rate(results).unwrap_or(0.0),
        reached_all_high: stay.iter().filter(|s| s.first_all_high_iter.is_some()).count() as u64,
        stayed_high: stay.iter().filter(|s| s.maintained == Some(true)).count() as u64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StayHigh {
    pub first_all_high_iter: Option<u64>,
    /// `None` when the all-high state was never reached.
    pub maintained: Option<bool>,
    /// Positions that dropped to `1 - 3/n` or below after reaching `1 - 1/n`.
    pub positions_fell_after_upper: usize,
}

/// Stay-high record from the exact per-iteration statistics of a run.
pub fn stay_high_analysis(result: &RunResult) -> StayHigh {
    StayHigh {
        first_all_high_iter: result.first_all_high_iter,
        maintained: result
            .first_all_high_iter
            .map(|_| result.first_high_loss_iter.is_none()),
        positions_fell_after_upper: result.positions_fell_after_upper,
    }
}

/// Stay-high record seen only through trace records: the first all-high
/// record, and whether every later record keeps `critical_pos = None`.
pub fn stay_high_from_trace(trace: &[TraceRecord]) -> (Option<u64>, Option<bool>) {
    let Some(start) = trace.iter().position(|r| r.all_high) else {
        return (None, None);
    };
    let kept = trace[start..].iter().all(|r| r.critical_pos.is_none());
    (Some(trace[start].iteration), Some(kept))
}

/// Stay-high counts over runs that ignore optimal samples and spend the
/// whole budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StayHighPastOptimum {
    pub trials: u64,
    pub reached_all_high: u64,
    /// Reached the all-high state and never left it before the budget ran out.
    pub kept_all_high: u64,
    /// Runs in which a frequency that had reached `1 - 1/n` later fell to
    /// `1 - 3/n` or below.
    pub runs_with_fall_from_upper: u64,
}

pub fn stay_high_past_optimum(
    params: edalab_core::ModelParams,
    benchmark: Benchmark,
    budget: u64,
    trials: u64,
    seed: u64,
) -> StayHighPastOptimum {
    let runs: Vec<StayHigh> = (0..trials)
        .into_par_iter()
        .map(|i| {
            stay_high_analysis(&run_cga_past_optimum(
                params, &benchmark, budget, seed, i, u64::MAX,
            ))
        })
        .collect();
    StayHighPastOptimum {
        trials,
        reached_all_high: runs.iter().filter(|s| s.first_all_high_iter.is_some()).count() as u64,
        kept_all_high: runs.iter().filter(|s| s.maintained == Some(true)).count() as u64,
        runs_with_fall_from_upper: runs
            .iter()
            .filter(|s| s.positions_fell_after_upper > 0)
            .count() as u64,
    }
}

/// Fraction of runs in which some frequency dropped to 1/4 or below.
pub fn below_quarter_rate(results: &[RunResult]) -> Option<f64> {
    (!results.is_empty()).then(|| {
        results.iter().filter(|r| r.ever_below_quarter).count() as f64 / results.len() as f64
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalAdvance {
    /// `(iteration, running maximum)` at every new maximum of the
    /// upper-border prefix length.
    pub running_max: Vec<(u64, usize)>,
    pub non_decreasing: bool,
    pub final_max: usize,
    /// Iterations between successive new maxima.
    pub gaps: Vec<u64>,
}

pub fn critical_advance_analysis(result: &RunResult) -> CriticalAdvance {
    let running_max: Vec<(u64, usize)> = result
        .prefix_milestones
        .iter()
        .map(|m| (m.iteration, m.prefix_len))
        .collect();
    let non_decreasing = running_max.windows(2).all(|w| w[0].1 <= w[1].1);
    let gaps = running_max.windows(2).map(|w| w[1].0 - w[0].0).collect();
    CriticalAdvance {
        final_max: running_max.last().map_or(0, |m| m.1),
        running_max,
        non_decreasing,
        gaps,
    }
}

/// 95th percentile of `gap / (mu ln n)` over all gaps of the given runs.
pub fn normalized_gap_p95(results: &[RunResult], n: usize, mu: f64) -> Option<f64> {
    let scale = mu * (n as f64).ln();
    let mut gaps: Vec<f64> = results
        .iter()
        .flat_map(|r| critical_advance_analysis(r).gaps)
        .map(|g| g as f64 / scale)
        .collect();
    gaps.sort_by(f64::total_cmp);
    quantile_sorted(&gaps, 0.95)
}

pub use edalab_core::model::optimum_prob;

#[derive(Debug, Clone, PartialEq)]
pub struct CompareConfig {
    pub benchmark: Benchmark,
    pub n_grid: Vec<usize>,
    pub mu_rule: Rule,
    pub budget_rule: Rule,
    /// UMDA offspring per selected individual.
    pub lambda_ratio: f64,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Cga,
    Umda,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Cga => "cga",
            Algorithm::Umda => "umda",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub algorithm: Algorithm,
    pub n: usize,
    /// cGA: the snapped `mu`. UMDA: the number of selected individuals.
    pub mu: f64,
    pub lambda: Option<usize>,
    pub budget: u64,
    pub trials: u64,
    pub success_rate: f64,
    pub median_evals: Option<f64>,
    /// Mean over runs of the fraction of iterations in which some frequency
    /// left the upper border.
    pub mean_departure_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    #[serde(skip)]
    pub cga_runs: Vec<Vec<RunResult>>,
    #[serde(skip)]
    pub umda_runs: Vec<Vec<UmdaRunResult>>,
}

/// UMDA sizes matched to the cGA's `mu`: `mu_sel = round(mu)` and
/// `lambda = round(lambda_ratio * mu_sel)`.
pub fn matched_umda(n: usize, cga_mu: f64, lambda_ratio: f64) -> Result<UmdaParams, Error> {
    if !lambda_ratio.is_finite() || lambda_ratio < 1.0 {
        return Err(Error::InvalidParameter {
            name: "lambda_ratio",
            reason: "must be at least 1",
        });
    }
    let mu_sel = (cga_mu.round() as usize).max(1);
    let lambda = (lambda_ratio * mu_sel as f64).round() as usize;
    UmdaParams::new(n, lambda, mu_sel)
}

/// Both algorithms on the same budgets; trial `i` of each uses stream `i`.
pub fn compare_cga_umda(cfg: &CompareConfig) -> Result<CompareReport, Error> {
    check_mu_rule(&cfg.mu_rule)?;
    let mut grid = cfg.n_grid.clone();
    grid.sort_unstable();
    grid.dedup();
    let mut report = CompareReport {
        rows: Vec::new(),
        cga_runs: Vec::new(),
        umda_runs: Vec::new(),
    };
    for &n in &grid {
        let wb = resolve_mu(n, &cfg.mu_rule)?;
        let mu = wb.params.mu();
        let budget = cfg.budget_rule.budget(n, mu);
        let umda = matched_umda(n, mu, cfg.lambda_ratio)?;

        let cga_runs = cga_trials(wb.params, cfg.benchmark, budget, cfg.trials, cfg.seed, u64::MAX);
        let umda_runs: Vec<UmdaRunResult> = (0..cfg.trials)
            .into_par_iter()
            .map(|i| run_umda(umda, &cfg.benchmark, budget, cfg.seed, i))
            .collect();

        let cga_hits: Vec<f64> = cga_runs
            .iter()
            .filter_map(|r| r.hit_time_evals.map(|h| h as f64))
            .collect();
        let cga_dep: Vec<f64> = cga_runs.iter().map(RunResult::departure_fraction).collect();
        report.rows.push(CompareRow {
            algorithm: Algorithm::Cga,
            n,
            mu,
            lambda: None,
            budget,
            trials: cfg.trials,
            success_rate: rate(cga_hits.len(), cga_runs.len()),
            median_evals: median_iqr(&cga_hits).map(|s| s.0),
            mean_departure_fraction: mean(&cga_dep).unwrap_or(0.0),
        });

        let umda_hits: Vec<f64> = umda_runs
            .iter()
            .filter_map(|r| r.hit_time_evals.map(|h| h as f64))
            .collect();
        let umda_dep: Vec<f64> = umda_runs
            .iter()
            .map(UmdaRunResult::departure_fraction)
            .collect();
        report.rows.push(CompareRow {
            algorithm: Algorithm::Umda,
            n,
            mu: umda.mu_sel() as f64,
            lambda: Some(umda.lambda()),
            budget,
            trials: cfg.trials,
            success_rate: rate(umda_hits.len(), umda_runs.len()),
            median_evals: median_iqr(&umda_hits).map(|s| s.0),
            mean_departure_fraction: mean(&umda_dep).unwrap_or(0.0),
        });
        report.cga_runs.push(cga_runs);
        report.umda_runs.push(umda_runs);
    }
    Ok(report)
}

fn rate(k: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        k as f64 / n as f64
    }
}
