//! Experiment configuration: a JSON file merged with command-line flags.
//!
//! Every key is optional at parse time. [`ExperimentConfig::resolve`] fills
//! defaults, rejects keys that do not apply to the subcommand and produces a
//! [`Job`]. The filled-in configuration is what reports echo, so an echoed
//! header parses back into the identical job.

use std::path::{Path, PathBuf};

use edalab_core::model::make_well_behaved;
use edalab_core::oracle::MAX_ORACLE_N;
use edalab_core::{Benchmark, Fitness, ModelParams};
use serde::{Deserialize, Serialize};

use crate::checks::Theorem;
use crate::experiments::{resolve_mu, CompareConfig, Rule, ScalingConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Run,
    Scaling,
    DriftCheck,
    OracleCheck,
    Compare,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::Scaling => "scaling",
            Command::DriftCheck => "drift-check",
            Command::OracleCheck => "oracle-check",
            Command::Compare => "compare",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config key `{key}`: {message}")]
    Key { key: String, message: String },
    #[error("cannot read config file {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config file {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
}

fn key_err(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Key {
        key: key.to_owned(),
        message: message.into(),
    }
}

/// Integer counts that also accept integral JSON floats such as `1e6`.
mod count {
    use serde::{Deserialize, Deserializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Number {
        Int(u64),
        Float(f64),
    }

    pub fn to_u64(x: f64) -> Option<u64> {
        // Integral and exactly representable.
        (x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x <= 9_007_199_254_740_992.0)
            .then_some(x as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u64>, D::Error> {
        match Option::<Number>::deserialize(d)? {
            None => Ok(None),
            Some(Number::Int(v)) => Ok(Some(v)),
            Some(Number::Float(x)) => to_u64(x)
                .map(Some)
                .ok_or_else(|| serde::de::Error::custom(format!("{x} is not a non-negative integer"))),
        }
    }
}

/// Parses a count given as an integer or in float notation (`1e6`).
pub fn parse_count(s: &str) -> Result<u64, String> {
    s.parse::<u64>().or_else(|_| {
        s.parse::<f64>()
            .ok()
            .and_then(count::to_u64)
            .ok_or_else(|| format!("{s:?} is not a non-negative integer"))
    })
}

/// All experiment parameters. Absent keys take the subcommand default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subcommand: Option<Command>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub benchmark: Option<Benchmark>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_rule: Option<Rule>,
    #[serde(default, with = "count_opt", skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget_rule: Option<Rule>,
    #[serde(default, with = "count_opt", skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, with = "count_opt", skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, with = "count_opt", skip_serializing_if = "Option::is_none")]
    pub trace_every: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem: Option<Theorem>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Horizon in iterations (`T`).
    #[serde(
        default,
        rename = "T",
        with = "count_opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub horizon: Option<u64>,
    /// 1-based bit position.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub position: Option<usize>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequencies: Option<Vec<f64>>,
    #[serde(default, with = "count_opt", skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tv_max: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_ratio: Option<f64>,

    /// Derived values echoed in report headers; ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved: Option<serde_json::Value>,
}

mod count_opt {
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<u64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.serialize_u64(*v),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u64>, D::Error> {
        super::count::deserialize(d)
    }
}

pub const DEFAULT_MU_RULE: &str = "2*n*ln2n";
pub const DEFAULT_BUDGET_RULE: &str = "24*mu*n*lnn";
pub const DEFAULT_SCALING_TRIALS: u64 = 30;
pub const DEFAULT_LAMBDA_RATIO: f64 = 12.0;
pub const DEFAULT_MULT_TRIALS: u64 = 100_000;
pub const DEFAULT_NEG_TRIALS: u64 = 10_000;
pub const DEFAULT_GENETIC_TRIALS: u64 = 1_000;
pub const DEFAULT_TV_MAX: f64 = 0.005;

#[derive(Debug, Clone, PartialEq)]
pub struct RunJob {
    pub benchmark: Benchmark,
    pub params: ModelParams,
    pub budget: u64,
    pub seed: u64,
    pub trace_every: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DriftJob {
    Mult {
        delta: f64,
        x0: f64,
        s_min: f64,
        r: Vec<f64>,
        trials: u64,
        seed: u64,
    },
    Neg {
        eps: f64,
        step: f64,
        b: f64,
        horizon: u64,
        trials: u64,
        seed: u64,
    },
    Genetic {
        benchmark: Benchmark,
        params: ModelParams,
        /// 0-based.
        position: usize,
        gamma: f64,
        horizon: u64,
        trials: u64,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleJob {
    pub benchmark: Benchmark,
    pub params: ModelParams,
    /// Grid indices of the model state.
    pub indices: Vec<u32>,
    pub samples: u64,
    pub tv_max: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Run(RunJob),
    Scaling(ScalingConfig),
    DriftCheck(DriftJob),
    OracleCheck(OracleJob),
    Compare(CompareConfig),
}

/// Keys that may be set for a subcommand (and theorem, for drift checks).
fn allowed_keys(cmd: Command, theorem: Option<Theorem>) -> &'static [&'static str] {
    match (cmd, theorem) {
        (Command::Run, _) => &[
            "benchmark", "n", "target_mu", "mu_rule", "budget", "budget_rule", "trace_every",
        ],
        (Command::Scaling, _) => &["benchmark", "n_grid", "mu_rule", "budget_rule", "trials"],
        (Command::Compare, _) => &[
            "benchmark", "n_grid", "mu_rule", "budget_rule", "trials", "lambda_ratio",
        ],
        (Command::OracleCheck, _) => &[
            "benchmark", "n", "target_mu", "frequencies", "samples", "tv_max",
        ],
        (Command::DriftCheck, Some(Theorem::Mult)) => &["theorem", "trials", "delta", "x0", "s_min", "r"],
        (Command::DriftCheck, Some(Theorem::Neg)) => &["theorem", "trials", "eps", "step", "b", "T"],
        (Command::DriftCheck, Some(Theorem::Genetic)) => &[
            "theorem", "trials", "benchmark", "n", "target_mu", "gamma", "T", "position",
        ],
        (Command::DriftCheck, None) => &["theorem"],
    }
}

const ALWAYS_ALLOWED: [&str; 5] = ["subcommand", "seed", "output", "format", "resolved"];

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text).map_err(|source| ConfigError::Parse {
            path: path.to_owned(),
            source,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Keys that are set, by their JSON names.
    fn present_keys(&self) -> Vec<String> {
        match serde_json::to_value(self).expect("config serializes") {
            serde_json::Value::Object(map) => map.into_iter().map(|(k, _)| k).collect(),
            _ => Vec::new(),
        }
    }

    /// Validates against `cmd`, fills every default and builds the job.
    /// The returned configuration has `subcommand` and `resolved` set.
    pub fn resolve(mut self, cmd: Command) -> Result<(Self, Job), ConfigError> {
        if let Some(file_cmd) = self.subcommand {
            if file_cmd != cmd {
                return Err(key_err(
                    "subcommand",
                    format!("config is for `{}`, not `{}`", file_cmd.as_str(), cmd.as_str()),
                ));
            }
        }
        self.subcommand = Some(cmd);
        self.resolved = None;
        if cmd == Command::DriftCheck && self.theorem.is_none() {
            return Err(key_err("theorem", "required (mult, neg or genetic)"));
        }
        let allowed = allowed_keys(cmd, self.theorem);
        for key in self.present_keys() {
            if !ALWAYS_ALLOWED.contains(&key.as_str()) && !allowed.contains(&key.as_str()) {
                return Err(key_err(&key, format!("does not apply to `{}`", cmd.as_str())));
            }
        }
        let seed = self
            .seed
            .ok_or_else(|| key_err("seed", "required; seeds must be explicit"))?;

        let job = match cmd {
            Command::Run => self.resolve_run(seed)?,
            Command::Scaling | Command::Compare => self.resolve_grid(cmd, seed)?,
            Command::DriftCheck => self.resolve_drift(seed)?,
            Command::OracleCheck => self.resolve_oracle(seed)?,
        };
        Ok((self, job))
    }

    fn benchmark_or_default(&mut self) -> Benchmark {
        *self.benchmark.get_or_insert(Benchmark::LeadingOnes)
    }

    fn require_n(&self) -> Result<usize, ConfigError> {
        let n = self.n.ok_or_else(|| key_err("n", "required"))?;
        if n < 3 {
            return Err(key_err("n", "must be at least 3"));
        }
        Ok(n)
    }

    fn params_from_target(&mut self, n: usize) -> Result<ModelParams, ConfigError> {
        let target = self.target_mu.ok_or_else(|| key_err("target_mu", "required"))?;
        check_positive("target_mu", target)?;
        let wb = make_well_behaved(n, target).map_err(|e| key_err("target_mu", e.to_string()))?;
        self.resolved = Some(serde_json::json!({
            "mu": wb.params.mu(),
            "half_range": wb.params.half_range(),
            "relative_adjustment": wb.relative_adjustment,
        }));
        Ok(wb.params)
    }

    fn resolve_run(&mut self, seed: u64) -> Result<Job, ConfigError> {
        let benchmark = self.benchmark_or_default();
        let n = self.require_n()?;
        let params = match (self.target_mu, self.mu_rule) {
            (Some(_), Some(_)) => {
                return Err(key_err("mu_rule", "give either target_mu or mu_rule"))
            }
            (None, None) => return Err(key_err("target_mu", "required (or mu_rule)")),
            (Some(_), None) => self.params_from_target(n)?,
            (None, Some(rule)) => {
                let wb = resolve_mu(n, &rule).map_err(|e| key_err("mu_rule", e.to_string()))?;
                self.resolved = Some(serde_json::json!({
                    "target_mu": wb.target_mu,
                    "mu": wb.params.mu(),
                    "half_range": wb.params.half_range(),
                    "relative_adjustment": wb.relative_adjustment,
                }));
                wb.params
            }
        };
        let budget = match (self.budget, self.budget_rule) {
            (Some(_), Some(_)) => {
                return Err(key_err("budget_rule", "give either budget or budget_rule"))
            }
            (None, None) => return Err(key_err("budget", "required (or budget_rule)")),
            (Some(b), None) => b,
            (None, Some(rule)) => rule.budget(n, params.mu()),
        };
        if budget == 0 {
            return Err(key_err("budget", "must be positive"));
        }
        if let Some(serde_json::Value::Object(map)) = self.resolved.as_mut() {
            map.insert("budget".into(), budget.into());
        }
        let trace_every = *self
            .trace_every
            .get_or_insert(edalab_core::cga::default_trace_every(budget));
        if trace_every == 0 {
            return Err(key_err("trace_every", "must be positive"));
        }
        Ok(Job::Run(RunJob {
            benchmark,
            params,
            budget,
            seed,
            trace_every,
        }))
    }

    fn resolve_grid(&mut self, cmd: Command, seed: u64) -> Result<Job, ConfigError> {
        let benchmark = self.benchmark_or_default();
        let n_grid = self
            .n_grid
            .clone()
            .ok_or_else(|| key_err("n_grid", "required"))?;
        if n_grid.is_empty() || n_grid.iter().any(|&n| n < 3) {
            return Err(key_err("n_grid", "must be non-empty with every n >= 3"));
        }
        let mu_rule = *self
            .mu_rule
            .get_or_insert(DEFAULT_MU_RULE.parse().expect("default rule"));
        let budget_rule = *self
            .budget_rule
            .get_or_insert(DEFAULT_BUDGET_RULE.parse().expect("default rule"));
        let trials = *self.trials.get_or_insert(DEFAULT_SCALING_TRIALS);
        if trials == 0 {
            return Err(key_err("trials", "must be positive"));
        }
        let mut per_n = Vec::new();
        for &n in &n_grid {
            let wb = resolve_mu(n, &mu_rule).map_err(|e| key_err("mu_rule", e.to_string()))?;
            let budget = budget_rule.budget(n, wb.params.mu());
            if budget == 0 {
                return Err(key_err("budget_rule", format!("gives a zero budget at n = {n}")));
            }
            per_n.push(serde_json::json!({
                "n": n,
                "target_mu": wb.target_mu,
                "mu": wb.params.mu(),
                "half_range": wb.params.half_range(),
                "budget": budget,
            }));
        }
        self.resolved = Some(serde_json::Value::Array(per_n));
        Ok(match cmd {
            Command::Scaling => Job::Scaling(ScalingConfig {
                benchmark,
                n_grid,
                mu_rule,
                budget_rule,
                trials,
                seed,
            }),
            _ => {
                let lambda_ratio = *self.lambda_ratio.get_or_insert(DEFAULT_LAMBDA_RATIO);
                if !lambda_ratio.is_finite() || lambda_ratio < 1.0 {
                    return Err(key_err("lambda_ratio", "must be at least 1"));
                }
                Job::Compare(CompareConfig {
                    benchmark,
                    n_grid,
                    mu_rule,
                    budget_rule,
                    lambda_ratio,
                    trials,
                    seed,
                })
            }
        })
    }

    fn resolve_drift(&mut self, seed: u64) -> Result<Job, ConfigError> {
        let theorem = self.theorem.expect("checked by resolve");
        Ok(Job::DriftCheck(match theorem {
            Theorem::Mult => {
                let delta = *self.delta.get_or_insert(0.1);
                let x0 = *self.x0.get_or_insert(1.0);
                let s_min = *self.s_min.get_or_insert(1.0);
                let r = self.r.get_or_insert_with(|| vec![1.0, 2.0, 3.0]).clone();
                let trials = *self.trials.get_or_insert(DEFAULT_MULT_TRIALS);
                if !(delta > 0.0 && delta <= 1.0) {
                    return Err(key_err("delta", "must lie in (0, 1]"));
                }
                check_positive("x0", x0)?;
                check_positive("s_min", s_min)?;
                if r.is_empty() || r.iter().any(|&r| !(r.is_finite() && r >= 0.0)) {
                    return Err(key_err("r", "must be a non-empty list of non-negative reals"));
                }
                check_trials(trials)?;
                DriftJob::Mult {
                    delta,
                    x0,
                    s_min,
                    r,
                    trials,
                    seed,
                }
            }
            Theorem::Neg => {
                let eps = self.eps.ok_or_else(|| key_err("eps", "required"))?;
                let step = self.step.ok_or_else(|| key_err("step", "required"))?;
                let b = self.b.ok_or_else(|| key_err("b", "required"))?;
                let horizon = self.horizon.ok_or_else(|| key_err("T", "required"))?;
                let trials = *self.trials.get_or_insert(DEFAULT_NEG_TRIALS);
                check_positive("step", step)?;
                check_positive("b", b)?;
                if !(eps.is_finite() && eps < 0.0 && eps.abs() <= step) {
                    return Err(key_err("eps", "must satisfy -step <= eps < 0"));
                }
                if b <= 2.0 * step {
                    return Err(key_err("b", "must exceed the jump bound 2 * step"));
                }
                check_count_positive("T", horizon)?;
                check_trials(trials)?;
                DriftJob::Neg {
                    eps,
                    step,
                    b,
                    horizon,
                    trials,
                    seed,
                }
            }
            Theorem::Genetic => {
                let benchmark = self.benchmark_or_default();
                let n = self.require_n()?;
                let params = self.params_from_target(n)?;
                let gamma = self.gamma.ok_or_else(|| key_err("gamma", "required"))?;
                if !(gamma > 0.0 && gamma <= 0.5) {
                    return Err(key_err("gamma", "must lie in (0, 1/2]"));
                }
                let horizon = self.horizon.ok_or_else(|| key_err("T", "required"))?;
                check_count_positive("T", horizon)?;
                let position = *self.position.get_or_insert(n);
                if position == 0 || position > n {
                    return Err(key_err("position", format!("must lie in 1..={n}")));
                }
                if !benchmark.weakly_prefers_ones() {
                    return Err(key_err("benchmark", "must weakly prefer ones"));
                }
                let trials = *self.trials.get_or_insert(DEFAULT_GENETIC_TRIALS);
                check_trials(trials)?;
                DriftJob::Genetic {
                    benchmark,
                    params,
                    position: position - 1,
                    gamma,
                    horizon,
                    trials,
                    seed,
                }
            }
        }))
    }

    fn resolve_oracle(&mut self, seed: u64) -> Result<Job, ConfigError> {
        let benchmark = self.benchmark_or_default();
        let n = self.require_n()?;
        if n > MAX_ORACLE_N {
            return Err(key_err(
                "n",
                format!("exact enumeration needs n <= {MAX_ORACLE_N}, got {n}"),
            ));
        }
        let params = self.params_from_target(n)?;
        let indices = match &self.frequencies {
            None => vec![params.half_range(); n],
            Some(p) if p.len() != n => {
                return Err(key_err("frequencies", format!("expected {n} values, got {}", p.len())))
            }
            Some(p) => p
                .iter()
                .map(|&x| grid_index(params, x))
                .collect::<Result<Vec<_>, _>>()?,
        };
        let samples = *self.samples.get_or_insert(0);
        let tv_max = *self.tv_max.get_or_insert(DEFAULT_TV_MAX);
        check_positive("tv_max", tv_max)?;
        Ok(Job::OracleCheck(OracleJob {
            benchmark,
            params,
            indices,
            samples,
            tv_max,
            seed,
        }))
    }
}

/// Grid index of a frequency value; the value must lie on the grid.
pub fn grid_index(params: ModelParams, p: f64) -> Result<u32, ConfigError> {
    let n = params.n() as f64;
    let m = f64::from(params.half_range());
    // p = (2m + k (n - 2)) / (2mn)
    let k = ((p * 2.0 * m * n - 2.0 * m) / (n - 2.0)).round();
    if !(0.0..=f64::from(params.max_index())).contains(&k) {
        return Err(key_err("frequencies", format!("{p} lies outside [1/n, 1 - 1/n]")));
    }
    let k = k as u32;
    let on_grid = params.freq_value(k).is_ok_and(|v| (v - p).abs() <= 1e-9);
    if !on_grid {
        return Err(key_err(
            "frequencies",
            format!("{p} is not a multiple of 1/mu away from 1/2"),
        ));
    }
    Ok(k)
}

fn check_positive(key: &'static str, x: f64) -> Result<(), ConfigError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(key_err(key, "must be positive"))
    }
}

fn check_count_positive(key: &'static str, x: u64) -> Result<(), ConfigError> {
    if x > 0 {
        Ok(())
    } else {
        Err(key_err(key, "must be positive"))
    }
}

fn check_trials(trials: u64) -> Result<(), ConfigError> {
    check_count_positive("trials", trials)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(json: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(json).unwrap()
    }

    fn key_of(e: ConfigError) -> String {
        match e {
            ConfigError::Key { key, .. } => key,
            other => panic!("{other}"),
        }
    }

    #[test]
    fn counts_accept_float_notation() {
        let c = cfg(r#"{"budget": 1e6, "seed": 7, "trials": 30}"#);
        assert_eq!(c.budget, Some(1_000_000));
        assert!(ExperimentConfig::from_json(r#"{"budget": 1.5}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"budget": -1}"#).is_err());
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert_eq!(parse_count("12"), Ok(12));
        assert!(parse_count("2.5").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = ExperimentConfig::from_json(r#"{"seed": 1, "colour": "red"}"#).unwrap_err();
        assert!(e.to_string().contains("colour"));
    }

    #[test]
    fn irrelevant_keys_are_rejected() {
        let c = cfg(r#"{"n": 8, "target_mu": 50, "budget": 100, "seed": 1, "gamma": 0.25}"#);
        assert_eq!(key_of(c.resolve(Command::Run).unwrap_err()), "gamma");
        let c = cfg(r#"{"subcommand": "scaling", "n_grid": [8], "seed": 1}"#);
        assert_eq!(key_of(c.resolve(Command::Run).unwrap_err()), "subcommand");
    }

    #[test]
    fn seed_is_required() {
        let c = cfg(r#"{"n": 8, "target_mu": 50, "budget": 100}"#);
        assert_eq!(key_of(c.resolve(Command::Run).unwrap_err()), "seed");
    }

    #[test]
    fn run_resolution_and_round_trip() {
        let c = cfg(r#"{"n": 32, "target_mu": 500, "budget": 1e6, "seed": 7}"#);
        let (filled, job) = c.resolve(Command::Run).unwrap();
        let Job::Run(run) = &job else { panic!() };
        assert_eq!(run.budget, 1_000_000);
        assert_eq!(run.params.half_range(), 234);
        assert_eq!(filled.trace_every, Some(50));
        let echoed = filled.to_json();
        assert!(echoed.contains("\"resolved\""));
        let (again, job2) = ExperimentConfig::from_json(&echoed)
            .unwrap()
            .resolve(Command::Run)
            .unwrap();
        assert_eq!(job, job2);
        assert_eq!(again, filled);
    }

    #[test]
    fn scaling_defaults() {
        let c = cfg(r#"{"n_grid": [16, 8], "seed": 3}"#);
        let (filled, job) = c.resolve(Command::Scaling).unwrap();
        let Job::Scaling(s) = job else { panic!() };
        assert_eq!(s.trials, 30);
        assert_eq!(s.mu_rule.to_string(), DEFAULT_MU_RULE);
        assert_eq!(filled.resolved.unwrap().as_array().unwrap().len(), 2);
        let c = cfg(r#"{"n_grid": [8], "seed": 3, "mu_rule": "1*mu*n*lnn"}"#);
        assert_eq!(key_of(c.resolve(Command::Scaling).unwrap_err()), "mu_rule");
    }

    #[test]
    fn drift_check_validation() {
        let c = cfg(r#"{"theorem": "genetic", "n": 20, "target_mu": 500, "gamma": 0.25, "T": 2000, "seed": 1}"#);
        let (filled, job) = c.resolve(Command::DriftCheck).unwrap();
        let Job::DriftCheck(DriftJob::Genetic { position, trials, .. }) = job else { panic!() };
        assert_eq!((position, trials), (19, 1000));
        assert_eq!(filled.position, Some(20));
        let c = cfg(r#"{"theorem": "neg", "eps": -0.5, "step": 1, "b": 1.5, "T": 10, "seed": 1}"#);
        assert_eq!(key_of(c.resolve(Command::DriftCheck).unwrap_err()), "b");
        let c = cfg(r#"{"theorem": "mult", "gamma": 0.2, "seed": 1}"#);
        assert_eq!(key_of(c.resolve(Command::DriftCheck).unwrap_err()), "gamma");
        let c = cfg(r#"{"seed": 1}"#);
        assert_eq!(key_of(c.resolve(Command::DriftCheck).unwrap_err()), "theorem");
    }

    #[test]
    fn oracle_limits_and_grid() {
        let c = cfg(r#"{"n": 11, "target_mu": 50, "seed": 1}"#);
        let e = c.resolve(Command::OracleCheck).unwrap_err();
        assert_eq!(e.to_string(), "config key `n`: exact enumeration needs n <= 10, got 11");
        let params = ModelParams::from_half_range(5, 3).unwrap();
        assert_eq!(grid_index(params, 0.5).unwrap(), 3);
        assert!(grid_index(params, 0.51).is_err());
        assert!(grid_index(params, 0.99).is_err());
    }
}
