//! Monte Carlo checks of the three drift tail bounds.
//!
//! A check runs independent trials, counts failures (the event whose
//! probability the theorem bounds) and passes when the one-sided 99% Wilson
//! lower bound of the failure rate does not exceed the bound. Trials are
//! independent: trial `i` uses stream `i` of the given seed.

use std::collections::HashMap;
use std::fmt;

use edalab_core::cga::{CgaState, SampleBuffers};
use edalab_core::drift::{
    GeneticDriftBound, JumpToZero, MultiplicativeDriftBound, NegativeDriftBound, ReflectedWalk,
};
use edalab_core::oracle::{
    conditional_drift_formula, exact_expected_delta, exact_step_distribution,
    expected_delta_formula,
};
use edalab_core::{Benchmark, Error, Fitness, FrequencyVector, ModelParams, RandomSource};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::stats::{wilson_interval, Z_99_ONE_SIDED};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theorem {
    Mult,
    Neg,
    Genetic,
}

impl Theorem {
    pub fn as_str(&self) -> &'static str {
        match self {
            Theorem::Mult => "mult",
            Theorem::Neg => "neg",
            Theorem::Genetic => "genetic",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Theorem {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mult" => Ok(Theorem::Mult),
            "neg" => Ok(Theorem::Neg),
            "genetic" => Ok(Theorem::Genetic),
            other => Err(format!(
                "unknown theorem {other:?}, expected mult, neg or genetic"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub theorem: Theorem,
    pub params: Vec<(&'static str, f64)>,
    /// Theorem bound on the failure probability, capped at 1.
    pub bound_value: f64,
    pub failures: u64,
    pub trials: u64,
    pub empirical_rate: f64,
    pub wilson_lower: f64,
    pub wilson_upper: f64,
    /// The bound is 1 and says nothing.
    pub vacuous: bool,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(
        theorem: Theorem,
        params: Vec<(&'static str, f64)>,
        bound_value: f64,
        failures: u64,
        trials: u64,
    ) -> Self {
        let bound_value = bound_value.min(1.0);
        let (wilson_lower, wilson_upper) = wilson_interval(failures, trials, Z_99_ONE_SIDED);
        let vacuous = bound_value >= 1.0;
        Self {
            theorem,
            params,
            bound_value,
            failures,
            trials,
            empirical_rate: if trials == 0 {
                0.0
            } else {
                failures as f64 / trials as f64
            },
            wilson_lower,
            wilson_upper,
            vacuous,
            pass: vacuous || wilson_lower <= bound_value,
        }
    }

    /// `key=value` pairs joined by `;`.
    pub fn params_string(&self) -> String {
        self.params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Jump-to-zero process against the multiplicative-drift tail, one report
/// per `r`. The same hitting times are reused for every `r`.
pub fn check_multiplicative(
    delta: f64,
    x0: f64,
    s_min: f64,
    rs: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<CheckReport>, Error> {
    let process = JumpToZero::new(delta, x0)?;
    let bounds = rs
        .iter()
        .map(|&r| MultiplicativeDriftBound::new(delta, x0, s_min, r))
        .collect::<Result<Vec<_>, _>>()?;
    let times: Vec<u64> = (0..trials)
        .into_par_iter()
        .map(|i| process.hitting_time(&mut RandomSource::new(seed, i)))
        .collect();
    Ok(bounds
        .iter()
        .map(|b| {
            let (threshold, prob) = b.tail();
            let failures = times.iter().filter(|&&t| t > threshold).count() as u64;
            CheckReport::new(
                Theorem::Mult,
                vec![
                    ("delta", delta),
                    ("x0", x0),
                    ("s_min", s_min),
                    ("r", b.r),
                    ("threshold", threshold as f64),
                ],
                prob,
                failures,
                trials,
            )
        })
        .collect())
}

/// Reflected walk with drift `eps` against the negative-drift tail.
///
/// The step bound is taken as `c = 2 * step`, which strictly exceeds every
/// jump of the walk.
pub fn check_negative(
    eps: f64,
    step: f64,
    b: f64,
    horizon: u64,
    trials: u64,
    seed: u64,
) -> Result<CheckReport, Error> {
    let walk = ReflectedWalk::new(eps, step, b)?;
    let bound = NegativeDriftBound::new(b, 2.0 * step, eps, horizon)?;
    let failures = (0..trials)
        .into_par_iter()
        .filter(|&i| walk.hits_within(horizon, &mut RandomSource::new(seed, i)))
        .count() as u64;
    Ok(CheckReport::new(
        Theorem::Neg,
        vec![
            ("eps", eps),
            ("step", step),
            ("b", b),
            ("c", bound.c),
            ("t", horizon as f64),
        ],
        bound.tail(),
        failures,
        trials,
    ))
}

/// Whether frequency `position` (0-based) of a fresh cGA run ever reaches
/// `1/2 - gamma` or below within `horizon` iterations.
pub fn genetic_drift_failure(
    params: ModelParams,
    benchmark: Benchmark,
    position: usize,
    gamma: f64,
    horizon: u64,
    rng: &mut RandomSource,
) -> bool {
    let level = 0.5 - gamma;
    let mut state = CgaState::new(params);
    let mut buf = SampleBuffers::new(params.n());
    let mut failed = state.freq.value(position) <= level;
    for _ in 0..horizon {
        if failed {
            break;
        }
        state.step_with(&benchmark, rng, &mut buf, |i, old, new| {
            if i == position && new < old {
                failed = params.freq_value(new).is_ok_and(|p| p <= level);
            }
        });
    }
    failed
}

/// Genetic-drift bound checked on `trials` independent cGA trajectories.
///
/// Rejects benchmarks that do not weakly prefer ones.
pub fn check_genetic_drift_on_cga(
    params: ModelParams,
    benchmark: Benchmark,
    position: usize,
    gamma: f64,
    horizon: u64,
    trials: u64,
    seed: u64,
) -> Result<CheckReport, Error> {
    if !benchmark.weakly_prefers_ones() {
        return Err(Error::InvalidParameter {
            name: "benchmark",
            reason: "the genetic-drift bound needs a weak preference for ones",
        });
    }
    if position >= params.n() {
        return Err(Error::InvalidParameter {
            name: "position",
            reason: "must be a position of the bit string",
        });
    }
    let bound = GeneticDriftBound::new(gamma, params.mu(), horizon, position)?;
    let failures = (0..trials)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = RandomSource::new(seed, i);
            genetic_drift_failure(params, benchmark, position, gamma, horizon, &mut rng)
        })
        .count() as u64;
    Ok(CheckReport::new(
        Theorem::Genetic,
        vec![
            ("n", params.n() as f64),
            ("mu", params.mu()),
            ("position", (position + 1) as f64),
            ("gamma", gamma),
            ("T", horizon as f64),
        ],
        bound.tail(),
        failures,
        trials,
    ))
}

/// Exact against closed-form drift at one position.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    /// 1-based.
    pub position: usize,
    pub frequency: f64,
    pub exact_delta: f64,
    /// Closed forms exist for LeadingOnes only.
    pub formula_delta: Option<f64>,
    pub change_probability: f64,
    pub exact_conditional: Option<f64>,
    pub formula_conditional: Option<f64>,
    /// The closed forms apply: LeadingOnes and the frequency is at least
    /// one grid step away from both borders.
    pub compared: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheckReport {
    pub n: usize,
    pub mu: f64,
    pub support_size: usize,
    pub total_mass: f64,
    pub rows: Vec<OracleRow>,
    pub formula_tolerance: f64,
    pub samples: u64,
    /// Total variation between sampled and exact step laws, when sampled.
    pub total_variation: Option<f64>,
    pub tv_max: f64,
    pub pass: bool,
}

/// Agreement tolerance of exact and closed-form drifts.
pub const FORMULA_TOLERANCE: f64 = 1e-10;

/// Histogram of post-clamping delta vectors over `samples` independent
/// single steps from `p`.
pub fn sampled_step_counts(
    p: &FrequencyVector,
    benchmark: Benchmark,
    samples: u64,
    rng: &mut RandomSource,
) -> HashMap<Vec<i8>, u64> {
    let mut counts: HashMap<Vec<i8>, u64> = HashMap::new();
    let mut buf = SampleBuffers::new(p.len());
    let mut deltas = vec![0i8; p.len()];
    for _ in 0..samples {
        let mut state = CgaState::from_frequencies(p.clone());
        deltas.fill(0);
        state.step_with(&benchmark, rng, &mut buf, |i, old, new| {
            deltas[i] = if new > old { 1 } else { -1 };
        });
        *counts.entry(deltas.clone()).or_insert(0) += 1;
    }
    counts
}

/// Enumerates the exact one-step law at `p`, compares it with the
/// closed-form drifts and, if `samples > 0`, with sampled steps.
pub fn oracle_check(
    p: &FrequencyVector,
    benchmark: Benchmark,
    samples: u64,
    tv_max: f64,
    seed: u64,
) -> Result<OracleCheckReport, Error> {
    let dist = exact_step_distribution(p, &benchmark)?;
    let freqs = p.values();
    let mu = p.params().mu();
    let top = p.params().max_index();
    let closed_form = benchmark == Benchmark::LeadingOnes;
    let rows: Vec<OracleRow> = (0..p.len())
        .map(|i| {
            let exact_delta = exact_expected_delta(&dist, i);
            let exact_conditional = dist.conditional_expected_delta(i);
            let (formula_delta, formula_conditional) = if closed_form {
                (
                    Some(expected_delta_formula(&freqs, i, mu)),
                    Some(conditional_drift_formula(&freqs, i, mu)),
                )
            } else {
                (None, None)
            };
            let k = p.index(i);
            let compared = closed_form && k > 0 && k < top;
            let close = |a: Option<f64>, b: Option<f64>| match (a, b) {
                (Some(a), Some(b)) => (a - b).abs() <= FORMULA_TOLERANCE,
                _ => false,
            };
            OracleRow {
                position: i + 1,
                frequency: freqs[i],
                exact_delta,
                formula_delta,
                change_probability: dist.change_probability(i),
                exact_conditional,
                formula_conditional,
                compared,
                pass: !compared
                    || (close(Some(exact_delta), formula_delta)
                        && close(exact_conditional, formula_conditional)),
            }
        })
        .collect();
    let total_variation = (samples > 0).then(|| {
        let counts = sampled_step_counts(p, benchmark, samples, &mut RandomSource::new(seed, 0));
        dist.total_variation(counts.iter().map(|(d, &c)| (d.as_slice(), c)), samples)
    });
    let pass = rows.iter().all(|r| r.pass) && total_variation.is_none_or(|tv| tv <= tv_max);
    Ok(OracleCheckReport {
        n: p.len(),
        mu,
        support_size: dist.support_size(),
        total_mass: dist.total_mass(),
        rows,
        formula_tolerance: FORMULA_TOLERANCE,
        samples,
        total_variation,
        tv_max,
        pass,
    })
}
