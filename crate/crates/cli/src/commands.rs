use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use field_slln::conditions::{
    lemma1_series_converges, lemma2_series_converge, theorem2_regime, RegimeParams,
};
use field_slln::field::{empirical_cov_audit, CholeskyGenerator, CirculantGenerator, FieldRealization};
use field_slln::harness::{self, ExperimentConfig, GeneratorKind, RmseRow};
use field_slln::rng::mix;
use field_slln::stats::distribution_summary;

use crate::config::{emit, parse_config, SeedSources};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "field-slln", version, about = "Strong-law experiments for Hermite-transformed Gaussian fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a config key, e.g. `--set grid.h=0.25`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output directory (defaults to `output.dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the Monte Carlo experiment and write samples, summaries and metadata.
    Simulate(RunArgs),
    /// Classify (beta, gamma, d) and report the admissible alpha interval.
    CheckConditions {
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, allow_hyphen_values = true)]
        gamma: f64,
        #[arg(long)]
        dim: usize,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
    },
    /// Print the RMSE table and optionally compare it with a reference table.
    RmseTable {
        #[command(flatten)]
        run: RunArgs,
        /// Read an existing `samples.csv` instead of running the experiment.
        #[arg(long)]
        samples: Option<PathBuf>,
        /// Reference CSV with `mu,rmse[,rel_tol]` rows.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long, default_value_t = 0.30)]
        rel_tol: f64,
    },
    /// Compare empirical covariances of simulated fields with the model.
    CovAudit {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 200)]
        realizations: usize,
        /// Lags in node units, `;`-separated, e.g. `1,0;0,1;2,0`.
        #[arg(long)]
        lags: Option<String>,
    },
    /// Write Q-Q data and normality diagnostics per mu.
    QqData {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        samples: Option<PathBuf>,
    },
}

/// Process environment visible to commands.
#[derive(Debug, Clone, Default)]
pub struct Env {
    pub seed: Option<String>,
}

impl RunArgs {
    fn config(&self, env: &Env) -> Result<ExperimentConfig, CliError> {
        let text = match &self.config {
            Some(path) => fs::read_to_string(path).map_err(|e| {
                CliError::validation(Some("--config"), format!("cannot read {}: {e}", path.display()))
            })?,
            None => String::new(),
        };
        let seeds = SeedSources {
            flag: self.seed,
            env: env.seed.clone(),
        };
        let mut config = parse_config(&text, &self.overrides, &seeds)?;
        if let Some(out) = &self.out {
            config.output_dir = out.clone();
        }
        Ok(config)
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string(value).map_err(|e| CliError::Runtime(e.into()))
}

pub fn dispatch(cli: Cli, env: &Env, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(run) => simulate(&run, env, stdout),
        Command::CheckConditions {
            beta,
            gamma,
            dim,
            alpha,
        } => check_conditions(beta, gamma, dim, alpha, stdout),
        Command::RmseTable {
            run,
            samples,
            reference,
            rel_tol,
        } => rmse_table(&run, samples.as_deref(), reference.as_deref(), rel_tol, env, stdout),
        Command::CovAudit {
            run,
            realizations,
            lags,
        } => cov_audit(&run, realizations, lags.as_deref(), env, stdout),
        Command::QqData { run, samples } => qq_data(&run, samples.as_deref(), env, stdout),
    }
}

fn simulate(run: &RunArgs, env: &Env, stdout: &mut dyn Write) -> Result<(), CliError> {
    let config = run.config(env)?;
    let result = harness::run_experiment(&config)?;
    harness::write_outputs(&result, &config.output_dir)?;
    fs::write(config.output_dir.join("effective.cfg"), emit(&config))?;
    harness::write_rmse_csv(&harness::rmse_table(&result), &mut *stdout)?;
    Ok(())
}

fn check_conditions(
    beta: f64,
    gamma: f64,
    dim: usize,
    alpha: Option<f64>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let p = RegimeParams::new(beta, gamma, dim)?;
    let verdict = theorem2_regime(&p)?;
    let mut out = json!({
        "beta": beta,
        "gamma": gamma,
        "gamma_zero_limit": gamma == 0.0,
        "dim": dim,
        "outcome": verdict.outcome,
        "alpha_interval": verdict.alpha_interval.map(|i| json!({
            "lower": i.lower,
            "upper": if i.upper.is_finite() { json!(i.upper) } else { json!("inf") },
        })),
    });
    if let Some(a) = alpha {
        if !(a > 0.0 && a.is_finite()) {
            return Err(CliError::validation(Some("alpha"), "must be positive"));
        }
        out["alpha"] = json!(a);
        out["variance_series_converges"] = json!(lemma1_series_converges(a, &p));
        out["oscillation_series_converge"] = json!(lemma2_series_converge(a, &p));
    }
    writeln!(stdout, "{out}")?;
    Ok(())
}

/// Samples per mu, either read from a file or produced by a fresh run.
fn load_samples(
    run: &RunArgs,
    samples: Option<&Path>,
    env: &Env,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), CliError> {
    match samples {
        Some(path) => Ok(harness::read_samples_csv(path).map_err(|e| match e {
            field_slln::Error::Io(io) => {
                CliError::validation(Some("--samples"), format!("cannot read {}: {io}", path.display()))
            }
            e => CliError::validation(Some("--samples"), e.to_string()),
        })?),
        None => {
            let config = run.config(env)?;
            let result = harness::run_experiment(&config)?;
            let samples = (0..config.mus.len()).map(|j| result.values_at(j)).collect();
            Ok((config.mus, samples))
        }
    }
}

fn rmse_table(
    run: &RunArgs,
    samples: Option<&Path>,
    reference: Option<&Path>,
    rel_tol: f64,
    env: &Env,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    if !(rel_tol >= 0.0 && rel_tol.is_finite()) {
        return Err(CliError::validation(Some("--rel-tol"), "must be nonnegative"));
    }
    let reference = match reference {
        Some(path) => Some(harness::read_reference_csv(path, rel_tol).map_err(|e| {
            CliError::validation(Some("--reference"), format!("{}: {e}", path.display()))
        })?),
        None => None,
    };
    let (mus, values) = load_samples(run, samples, env)?;
    let rows: Vec<RmseRow> = harness::rmse_rows(&mus, &values);
    if let Some(out) = &run.out {
        fs::create_dir_all(out)?;
        harness::write_rmse_csv(&rows, fs::File::create(out.join("rmse.csv"))?)?;
    }
    harness::write_rmse_csv(&rows, &mut *stdout)?;
    if let Some(reference) = reference {
        let report = harness::compare_to_reference(&rows, &reference)
            .map_err(|e| CliError::validation(Some("--reference"), e.to_string()))?;
        writeln!(stdout, "{}", to_json(&report)?)?;
        if !report.all_pass {
            let failed: Vec<String> = report
                .rows
                .iter()
                .filter(|r| !r.pass)
                .map(|r| format!("mu={} rel_error={:.3}", r.mu, r.rel_error))
                .collect();
            return Err(CliError::Comparison(format!(
                "reference comparison failed: {}",
                failed.join("; ")
            )));
        }
    }
    Ok(())
}

fn parse_lags(text: &str, dim: usize) -> Result<Vec<Vec<isize>>, CliError> {
    text.split(';')
        .map(|lag| {
            let v: Vec<isize> = lag
                .split(',')
                .map(|s| s.trim().parse())
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::validation(Some("--lags"), format!("bad lag `{lag}`")))?;
            if v.len() != dim {
                return Err(CliError::validation(
                    Some("--lags"),
                    format!("lag `{lag}` needs {dim} components"),
                ));
            }
            Ok(v)
        })
        .collect()
}

fn default_lags(dim: usize) -> Vec<Vec<isize>> {
    [0, 1, 2, 5]
        .iter()
        .flat_map(|&l| {
            if dim == 1 {
                vec![vec![l]]
            } else if l == 0 {
                vec![vec![0, 0]]
            } else {
                vec![vec![l, 0], vec![0, l]]
            }
        })
        .collect()
}

fn cov_audit(
    run: &RunArgs,
    realizations: usize,
    lags: Option<&str>,
    env: &Env,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let config = run.config(env)?;
    if realizations < 2 {
        return Err(CliError::validation(Some("--realizations"), "need at least 2"));
    }
    let lags = match lags {
        Some(text) => parse_lags(text, config.dim)?,
        None => default_lags(config.dim),
    };
    let grid = config.grid()?;
    let fields: Vec<FieldRealization> = match config.generator {
        GeneratorKind::Cholesky => {
            let g = CholeskyGenerator::new(&config.cov, grid)?;
            (0..realizations as u64).map(|r| g.sample(mix(config.seed, r))).collect()
        }
        GeneratorKind::Circulant => {
            let g = CirculantGenerator::new(&config.cov, grid, config.embedding)?;
            (0..realizations as u64).map(|r| g.sample(mix(config.seed, r))).collect()
        }
    };
    let audit = empirical_cov_audit(&fields, &config.cov, &lags)?;
    let text = to_json(&audit)?;
    if let Some(out) = &run.out {
        fs::create_dir_all(out)?;
        fs::write(out.join("cov_audit.json"), format!("{text}\n"))?;
    }
    writeln!(stdout, "{text}")?;
    Ok(())
}

fn qq_data(run: &RunArgs, samples: Option<&Path>, env: &Env, stdout: &mut dyn Write) -> Result<(), CliError> {
    let out_dir = match (&run.out, samples) {
        (Some(out), _) => Some(out.clone()),
        (None, Some(_)) => None,
        (None, None) => Some(run.config(env)?.output_dir),
    };
    let (mus, values) = load_samples(run, samples, env)?;
    let mut ok = Vec::new();
    for (mu, xs) in mus.iter().zip(&values) {
        match distribution_summary(xs) {
            Ok(s) => {
                let line = json!({
                    "mu": mu,
                    "skewness": s.moments.skewness,
                    "skewness_z": s.skewness_z,
                    "excess_kurtosis": s.moments.excess_kurtosis,
                    "kurtosis_z": s.kurtosis_z,
                    "omnibus": s.omnibus,
                    "omnibus_p": s.omnibus_p,
                    "rejects_normality_5": s.rejects_normality(0.05),
                });
                writeln!(stdout, "{line}")?;
                ok.push((*mu, s));
            }
            Err(e) => writeln!(stdout, "{}", json!({ "mu": mu, "skipped": e.to_string() }))?,
        }
    }
    match out_dir {
        Some(dir) => {
            fs::create_dir_all(&dir)?;
            harness::write_qq_csv(&ok, fs::File::create(dir.join("qq.csv"))?)?;
        }
        None => harness::write_qq_csv(&ok, &mut *stdout)?,
    }
    Ok(())
}
