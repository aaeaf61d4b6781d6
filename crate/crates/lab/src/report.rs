//! CSV and JSON report writers.
//!
//! CSV reports start with two comment lines, `# config: <json>` holding the
//! resolved configuration and `# schema: <name>/<major>`, followed by a header
//! row. Columns never reorder within a major version; summaries that do not
//! fit the row shape go into trailing `# <name>: ...` comment lines.
//! JSON reports are one object `{"config": ..., "result": ...}`.
//!
//! Reals are written in the shortest form that parses back to the same `f64`.

use std::io::{self, Write};

use edalab_core::cga::RunResult;
use serde::Serialize;

use crate::checks::{CheckReport, OracleCheckReport};
use crate::config::ExperimentConfig;
use crate::experiments::{CompareReport, ScalingReport};

pub const RUN_SCHEMA: &str = "run/1";
pub const SCALING_SCHEMA: &str = "scaling/1";
pub const DRIFT_SCHEMA: &str = "drift-check/1";
pub const ORACLE_SCHEMA: &str = "oracle-check/1";
pub const COMPARE_SCHEMA: &str = "compare/1";

pub const RUN_COLUMNS: [&str; 6] = [
    "iteration",
    "critical_pos",
    "min_freq",
    "prefix_len_at_upper",
    "optimum_prob",
    "all_high",
];
pub const SCALING_COLUMNS: [&str; 14] = [
    "n",
    "mu",
    "trials",
    "success_rate",
    "median_evals",
    "iqr_lo",
    "iqr_hi",
    "mean_first_all_high",
    "target_mu",
    "budget",
    "mean_evals",
    "below_quarter_rate",
    "reached_all_high",
    "stayed_high",
];
pub const DRIFT_COLUMNS: [&str; 8] = [
    "theorem",
    "params",
    "bound",
    "empirical",
    "trials",
    "wilson_upper",
    "vacuous",
    "pass",
];
pub const ORACLE_COLUMNS: [&str; 9] = [
    "position",
    "frequency",
    "exact_delta",
    "formula_delta",
    "change_probability",
    "exact_conditional",
    "formula_conditional",
    "compared",
    "pass",
];
pub const COMPARE_COLUMNS: [&str; 9] = [
    "algorithm",
    "n",
    "mu",
    "lambda",
    "budget",
    "trials",
    "success_rate",
    "median_evals",
    "mean_departure_fraction",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

fn write_csv<W: Write>(
    out: &mut W,
    config: &ExperimentConfig,
    schema: &str,
    columns: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> io::Result<()> {
    writeln!(out, "# config: {}", config.to_json())?;
    writeln!(out, "# schema: {schema}")?;
    let mut w = csv::Writer::from_writer(&mut *out);
    w.write_record(columns).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()
}

pub fn write_json<W: Write, R: Serialize + ?Sized>(
    out: &mut W,
    config: &ExperimentConfig,
    result: &R,
) -> io::Result<()> {
    #[derive(Serialize)]
    struct Envelope<'a, R: ?Sized> {
        config: &'a ExperimentConfig,
        result: &'a R,
    }
    serde_json::to_writer_pretty(&mut *out, &Envelope { config, result })?;
    writeln!(out)
}

/// Trace rows, then the run summary as a `# result:` line.
pub fn run_csv<W: Write>(out: &mut W, config: &ExperimentConfig, r: &RunResult) -> io::Result<()> {
    let rows = r.trace.iter().map(|t| {
        vec![
            t.iteration.to_string(),
            opt(t.critical_pos),
            t.min_freq.to_string(),
            t.prefix_len_at_upper.to_string(),
            t.optimum_prob.to_string(),
            t.all_high.to_string(),
        ]
    });
    write_csv(out, config, RUN_SCHEMA, &RUN_COLUMNS, rows)?;
    let mut summary = serde_json::to_value(r)?;
    if let Some(map) = summary.as_object_mut() {
        map.remove("trace");
    }
    writeln!(out, "# result: {summary}")
}

/// One row per `n`, then the fit as a `# fit:` line.
pub fn scaling_csv<W: Write>(
    out: &mut W,
    config: &ExperimentConfig,
    report: &ScalingReport,
) -> io::Result<()> {
    let rows = report.rows.iter().map(|r| {
        vec![
            r.n.to_string(),
            r.mu.to_string(),
            r.trials.to_string(),
            r.success_rate.to_string(),
            opt(r.median_evals),
            opt(r.iqr_lo),
            opt(r.iqr_hi),
            opt(r.mean_first_all_high),
            r.target_mu.to_string(),
            r.budget.to_string(),
            opt(r.mean_evals),
            r.below_quarter_rate.to_string(),
            r.reached_all_high.to_string(),
            r.stayed_high.to_string(),
        ]
    });
    write_csv(out, config, SCALING_SCHEMA, &SCALING_COLUMNS, rows)?;
    match &report.fit {
        Some(f) => writeln!(
            out,
            "# fit: slope={},intercept={},r2={}",
            f.slope, f.intercept, f.r_squared
        ),
        None => writeln!(out, "# fit: none (fewer than 3 sizes with successes)"),
    }
}

pub fn drift_csv<W: Write>(
    out: &mut W,
    config: &ExperimentConfig,
    reports: &[CheckReport],
) -> io::Result<()> {
    let rows = reports.iter().map(|r| {
        vec![
            r.theorem.to_string(),
            r.params_string(),
            r.bound_value.to_string(),
            r.empirical_rate.to_string(),
            r.trials.to_string(),
            r.wilson_upper.to_string(),
            r.vacuous.to_string(),
            r.pass.to_string(),
        ]
    });
    write_csv(out, config, DRIFT_SCHEMA, &DRIFT_COLUMNS, rows)
}

/// Per-position rows, then the sampled comparison as a `# sampled:` line.
pub fn oracle_csv<W: Write>(
    out: &mut W,
    config: &ExperimentConfig,
    report: &OracleCheckReport,
) -> io::Result<()> {
    let rows = report.rows.iter().map(|r| {
        vec![
            r.position.to_string(),
            r.frequency.to_string(),
            r.exact_delta.to_string(),
            opt(r.formula_delta),
            r.change_probability.to_string(),
            opt(r.exact_conditional),
            opt(r.formula_conditional),
            r.compared.to_string(),
            r.pass.to_string(),
        ]
    });
    write_csv(out, config, ORACLE_SCHEMA, &ORACLE_COLUMNS, rows)?;
    writeln!(
        out,
        "# sampled: samples={},total_variation={},tv_max={},support_size={},pass={}",
        report.samples,
        opt(report.total_variation),
        report.tv_max,
        report.support_size,
        report.pass
    )
}

pub fn compare_csv<W: Write>(
    out: &mut W,
    config: &ExperimentConfig,
    report: &CompareReport,
) -> io::Result<()> {
    let rows = report.rows.iter().map(|r| {
        vec![
            r.algorithm.as_str().to_owned(),
            r.n.to_string(),
            r.mu.to_string(),
            opt(r.lambda),
            r.budget.to_string(),
            r.trials.to_string(),
            r.success_rate.to_string(),
            opt(r.median_evals),
            r.mean_departure_fraction.to_string(),
        ]
    });
    write_csv(out, config, COMPARE_SCHEMA, &COMPARE_COLUMNS, rows)
}

/// The configuration echoed by a CSV report (its `# config:` line).
pub fn config_from_csv(text: &str) -> Option<Result<ExperimentConfig, serde_json::Error>> {
    text.lines()
        .find_map(|l| l.strip_prefix("# config: "))
        .map(ExperimentConfig::from_json)
}
