//! Command-line front end. Exit codes: 0 success, 1 a check failed,
//! 2 configuration or usage error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use edalab_core::cga::run_cga;
use edalab_core::{Benchmark, FrequencyVector};

use crate::checks::{
    check_genetic_drift_on_cga, check_multiplicative, check_negative, oracle_check, Theorem,
};
use crate::config::{parse_count, Command, ConfigError, DriftJob, ExperimentConfig, Format, Job};
use crate::experiments::{compare_cga_umda, scaling_experiment, Rule};
use crate::report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "edalab", version, about = "Compact GA experiments on LeadingOnes")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// One traced cGA run.
    Run(RunArgs),
    /// Success rates and runtime scaling over a grid of problem sizes.
    Scaling(GridArgs),
    /// Monte Carlo check of a drift tail bound.
    DriftCheck(DriftArgs),
    /// Exact one-step law against closed forms and sampled steps (n <= 10).
    OracleCheck(OracleArgs),
    /// cGA against UMDA on the same budgets.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_count)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    benchmark: Option<Benchmark>,
    #[arg(long)]
    n: Option<usize>,
    /// Requested population size, snapped to the nearest well-behaved value.
    #[arg(long = "mu")]
    target_mu: Option<f64>,
    #[arg(long)]
    mu_rule: Option<Rule>,
    #[arg(long, value_parser = parse_count)]
    budget: Option<u64>,
    #[arg(long)]
    budget_rule: Option<Rule>,
    #[arg(long, value_parser = parse_count)]
    trace_every: Option<u64>,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    benchmark: Option<Benchmark>,
    /// Comma-separated problem sizes.
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    #[arg(long)]
    mu_rule: Option<Rule>,
    #[arg(long)]
    budget_rule: Option<Rule>,
    #[arg(long, value_parser = parse_count)]
    trials: Option<u64>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// UMDA offspring per selected individual.
    #[arg(long)]
    lambda_ratio: Option<f64>,
}

#[derive(Debug, Args)]
struct DriftArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    theorem: Option<Theorem>,
    #[arg(long, value_parser = parse_count)]
    trials: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long)]
    s_min: Option<f64>,
    /// Comma-separated tail parameters.
    #[arg(long, value_delimiter = ',')]
    r: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    benchmark: Option<Benchmark>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "mu")]
    target_mu: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Horizon in iterations.
    #[arg(long = "T", visible_alias = "horizon", value_parser = parse_count)]
    horizon: Option<u64>,
    /// 1-based position; defaults to n.
    #[arg(long)]
    position: Option<usize>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    benchmark: Option<Benchmark>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "mu")]
    target_mu: Option<f64>,
    /// Comma-separated grid frequencies; all 1/2 when absent.
    #[arg(long, value_delimiter = ',')]
    frequencies: Option<Vec<f64>>,
    /// Sampled single steps compared with the exact law.
    #[arg(long, value_parser = parse_count)]
    samples: Option<u64>,
    #[arg(long)]
    tv_max: Option<f64>,
}

fn set<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

fn base_config(common: &Common) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    set(&mut cfg.seed, common.seed);
    set(&mut cfg.output, common.output.clone());
    set(&mut cfg.format, common.format);
    Ok(cfg)
}

fn apply_grid(cfg: &mut ExperimentConfig, a: GridArgs) {
    set(&mut cfg.benchmark, a.benchmark);
    set(&mut cfg.n_grid, a.n_grid);
    set(&mut cfg.mu_rule, a.mu_rule);
    set(&mut cfg.budget_rule, a.budget_rule);
    set(&mut cfg.trials, a.trials);
}

/// The merged configuration of file and flags, before resolution.
fn merged_config(sub: Sub) -> Result<(Command, ExperimentConfig), ConfigError> {
    Ok(match sub {
        Sub::Run(a) => {
            let mut cfg = base_config(&a.common)?;
            set(&mut cfg.benchmark, a.benchmark);
            set(&mut cfg.n, a.n);
            set(&mut cfg.target_mu, a.target_mu);
            set(&mut cfg.mu_rule, a.mu_rule);
            set(&mut cfg.budget, a.budget);
            set(&mut cfg.budget_rule, a.budget_rule);
            set(&mut cfg.trace_every, a.trace_every);
            (Command::Run, cfg)
        }
        Sub::Scaling(a) => {
            let mut cfg = base_config(&a.common)?;
            apply_grid(&mut cfg, a);
            (Command::Scaling, cfg)
        }
        Sub::Compare(a) => {
            let mut cfg = base_config(&a.grid.common)?;
            apply_grid(&mut cfg, a.grid);
            set(&mut cfg.lambda_ratio, a.lambda_ratio);
            (Command::Compare, cfg)
        }
        Sub::DriftCheck(a) => {
            let mut cfg = base_config(&a.common)?;
            set(&mut cfg.theorem, a.theorem);
            set(&mut cfg.trials, a.trials);
            set(&mut cfg.delta, a.delta);
            set(&mut cfg.x0, a.x0);
            set(&mut cfg.s_min, a.s_min);
            set(&mut cfg.r, a.r);
            set(&mut cfg.eps, a.eps);
            set(&mut cfg.step, a.step);
            set(&mut cfg.b, a.b);
            set(&mut cfg.benchmark, a.benchmark);
            set(&mut cfg.n, a.n);
            set(&mut cfg.target_mu, a.target_mu);
            set(&mut cfg.gamma, a.gamma);
            set(&mut cfg.horizon, a.horizon);
            set(&mut cfg.position, a.position);
            (Command::DriftCheck, cfg)
        }
        Sub::OracleCheck(a) => {
            let mut cfg = base_config(&a.common)?;
            set(&mut cfg.benchmark, a.benchmark);
            set(&mut cfg.n, a.n);
            set(&mut cfg.target_mu, a.target_mu);
            set(&mut cfg.frequencies, a.frequencies);
            set(&mut cfg.samples, a.samples);
            set(&mut cfg.tv_max, a.tv_max);
            (Command::OracleCheck, cfg)
        }
    })
}

#[derive(Debug, thiserror::Error)]
enum ExecError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Core(#[from] edalab_core::Error),
}

/// Runs the job and writes its report. Returns whether every check passed.
fn execute<W: Write>(job: &Job, cfg: &ExperimentConfig, out: &mut W) -> Result<bool, ExecError> {
    let csv = cfg.format == Some(Format::Csv);
    match job {
        Job::Run(j) => {
            let r = run_cga(j.params, &j.benchmark, j.budget, j.seed, 0, j.trace_every);
            if csv {
                report::run_csv(out, cfg, &r)?;
            } else {
                report::write_json(out, cfg, &r)?;
            }
            Ok(true)
        }
        Job::Scaling(s) => {
            let r = scaling_experiment(s)?;
            if csv {
                report::scaling_csv(out, cfg, &r)?;
            } else {
                report::write_json(out, cfg, &r)?;
            }
            Ok(true)
        }
        Job::Compare(c) => {
            let r = compare_cga_umda(c)?;
            if csv {
                report::compare_csv(out, cfg, &r)?;
            } else {
                report::write_json(out, cfg, &r)?;
            }
            Ok(true)
        }
        Job::DriftCheck(d) => {
            let reports = match d {
                DriftJob::Mult {
                    delta,
                    x0,
                    s_min,
                    r,
                    trials,
                    seed,
                } => check_multiplicative(*delta, *x0, *s_min, r, *trials, *seed)?,
                DriftJob::Neg {
                    eps,
                    step,
                    b,
                    horizon,
                    trials,
                    seed,
                } => vec![check_negative(*eps, *step, *b, *horizon, *trials, *seed)?],
                DriftJob::Genetic {
                    benchmark,
                    params,
                    position,
                    gamma,
                    horizon,
                    trials,
                    seed,
                } => vec![check_genetic_drift_on_cga(
                    *params, *benchmark, *position, *gamma, *horizon, *trials, *seed,
                )?],
            };
            if csv {
                report::drift_csv(out, cfg, &reports)?;
            } else {
                report::write_json(out, cfg, &reports)?;
            }
            Ok(reports.iter().all(|r| r.pass))
        }
        Job::OracleCheck(o) => {
            let p = FrequencyVector::from_indices(o.params, o.indices.clone())?;
            let r = oracle_check(&p, o.benchmark, o.samples, o.tv_max, o.seed)?;
            if csv {
                report::oracle_csv(out, cfg, &r)?;
            } else {
                report::write_json(out, cfg, &r)?;
            }
            Ok(r.pass)
        }
    }
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the exit code. Reports go to `--output` or `stdout`; diagnostics
/// go to `stderr`.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let resolved = merged_config(cli.command).and_then(|(cmd, mut cfg)| {
        cfg.format.get_or_insert(if cmd == Command::Run {
            Format::Json
        } else {
            Format::Csv
        });
        cfg.resolve(cmd)
    });
    let (cfg, job) = match resolved {
        Ok(v) => v,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_CONFIG;
        }
    };

    let result = match &cfg.output {
        Some(path) => match File::create(path) {
            Ok(f) => {
                let mut w = BufWriter::new(f);
                execute(&job, &cfg, &mut w).and_then(|ok| {
                    w.flush()?;
                    Ok(ok)
                })
            }
            Err(e) => {
                let _ = writeln!(stderr, "error: config key `output`: {}: {e}", path.display());
                return EXIT_CONFIG;
            }
        },
        None => {
            let mut w = io::LineWriter::new(stdout);
            execute(&job, &cfg, &mut w)
        }
    };
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            let _ = writeln!(stderr, "check failed");
            EXIT_CHECK_FAILED
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_CONFIG
        }
    }
}
