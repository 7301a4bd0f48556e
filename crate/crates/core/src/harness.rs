//! Seeded Monte Carlo driver: replicate generation, `ξ(μ)` sampling, RMSE
//! tables, distribution summaries and persistence.
//!
//! Replicate `r` draws its field from child seed `mix(seed, r)`; replicates run
//! in parallel and are reduced in replicate order, so results are bit-identical
//! for any thread count and a run with more replicates extends a smaller one.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditions::{variance_upper_bound, RegimeParams};
use crate::covariance::CovarianceModel;
use crate::error::{Error, Result};
use crate::estimator::{transform_field, xi_curve, xi_estimate, Window, XiSample};
use crate::field::{
    CholeskyGenerator, CirculantGenerator, EmbeddingPolicy, EmbeddingReport, FieldRealization,
    Grid,
};
use crate::hermite::WeightFunction;
use crate::rng::mix;
use crate::stats::{self, distribution_summary, DistributionSummary, Moments, QUANTILE_LABELS};

/// Published RMSE reference values for the default experiment: `(mu, rmse)`.
pub const REFERENCE_RMSE: [(f64, f64); 7] = [
    (10.0, 0.217),
    (50.0, 0.106),
    (100.0, 0.079),
    (150.0, 0.068),
    (200.0, 0.057),
    (250.0, 0.052),
    (300.0, 0.048),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Cholesky,
    Circulant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Square,
    Disk,
}

/// Whether all `mu` of a replicate share one field (nested windows) or each
/// `mu` gets its own independent field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nesting {
    Nested,
    Independent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub cov: CovarianceModel,
    pub weight: WeightFunction,
    pub hermite_k: u32,
    pub window: WindowKind,
    pub grid_h: f64,
    pub grid_n: usize,
    pub mus: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub generator: GeneratorKind,
    pub embedding: EmbeddingPolicy,
    pub nesting: Nesting,
    /// Worker threads; 0 uses the rayon default.
    pub threads: usize,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// Reduced-scale version of the published experiment: `h = 0.5`, `mu <= 100`.
    pub fn reduced(seed: u64) -> Self {
        Self {
            dim: 2,
            cov: CovarianceModel::Cauchy { beta: 0.4 },
            weight: WeightFunction::MonomialProduct {
                exponents: vec![0.1, 0.1],
            },
            hermite_k: 2,
            window: WindowKind::Square,
            grid_h: 0.5,
            grid_n: 200,
            mus: vec![10.0, 50.0, 100.0],
            replicates: 100,
            seed,
            generator: GeneratorKind::Circulant,
            embedding: EmbeddingPolicy::default(),
            nesting: Nesting::Nested,
            threads: 0,
            output_dir: PathBuf::from("out"),
        }
    }

    /// Full published scale: `h = 0.25` on `[-300, 300]^2`, 300 replicates.
    pub fn full(seed: u64) -> Self {
        Self {
            grid_h: 0.25,
            grid_n: 1200,
            mus: REFERENCE_RMSE.iter().map(|r| r.0).collect(),
            replicates: 300,
            ..Self::reduced(seed)
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.dim, self.grid_h, self.grid_n)
    }

    pub fn window(&self) -> Window {
        match self.window {
            WindowKind::Square => Window::square(self.dim),
            WindowKind::Disk => Window::disk(self.dim),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        self.cov.validate()?;
        self.weight.validate()?;
        if let Some(d) = self.weight.dimension() {
            if d != self.dim {
                return Err(Error::domain(
                    "weight.l",
                    format!("weight has dimension {d}, experiment has {}", self.dim),
                ));
            }
        }
        if self.hermite_k == 0 {
            return Err(Error::domain("hermite.k", "order must be at least 1"));
        }
        self.embedding.validate()?;
        if self.replicates == 0 {
            return Err(Error::domain("replicates", "need at least one replicate"));
        }
        if self.mus.is_empty() {
            return Err(Error::domain("mus", "need at least one mu"));
        }
        if self.mus.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(Error::domain("mus", "values must be positive"));
        }
        if self.mus.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("mus", "values must be strictly increasing"));
        }
        let required = self.mus[self.mus.len() - 1] * self.window().half_extent();
        if required > grid.extent() * (1.0 + 1e-12) {
            return Err(Error::Coverage {
                required,
                available: grid.extent(),
            });
        }
        Ok(())
    }
}

enum Generator {
    Cholesky(CholeskyGenerator),
    Circulant(CirculantGenerator),
}

impl Generator {
    fn new(config: &ExperimentConfig, grid: Grid) -> Result<Self> {
        Ok(match config.generator {
            GeneratorKind::Cholesky => Generator::Cholesky(CholeskyGenerator::new(&config.cov, grid)?),
            GeneratorKind::Circulant => {
                Generator::Circulant(CirculantGenerator::new(&config.cov, grid, config.embedding)?)
            }
        })
    }

    fn sample(&self, seed: u64) -> FieldRealization {
        match self {
            Generator::Cholesky(g) => g.sample(seed),
            Generator::Circulant(g) => g.sample(seed),
        }
    }

    fn report(&self) -> Option<EmbeddingReport> {
        match self {
            Generator::Cholesky(_) => None,
            Generator::Circulant(g) => Some(g.report().clone()),
        }
    }
}

/// Samples and summary statistics at one `mu`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MuSummary {
    pub mu: f64,
    pub rmse: f64,
    pub moments: Moments,
    pub quantiles: Vec<(String, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    /// `samples[j][r]` is `ξ(mus[j])` of replicate `r`.
    pub samples: Vec<Vec<XiSample>>,
    pub summaries: Vec<MuSummary>,
    pub child_seeds: Vec<u64>,
    pub embedding: Option<EmbeddingReport>,
    pub elapsed_seconds: f64,
}

impl ExperimentResult {
    pub fn values_at(&self, j: usize) -> Vec<f64> {
        self.samples[j].iter().map(|s| s.value).collect()
    }

    pub fn mus(&self) -> Vec<f64> {
        self.config.mus.clone()
    }
}

fn summarize(mu: f64, values: &[f64]) -> MuSummary {
    let moments = stats::moments(values);
    let sorted = stats::sorted(values);
    MuSummary {
        mu,
        rmse: moments.mean_square.sqrt(),
        moments,
        quantiles: stats::QUANTILE_LEVELS
            .iter()
            .zip(QUANTILE_LABELS)
            .map(|(&p, l)| (l.to_string(), stats::quantile_sorted(&sorted, p)))
            .collect(),
    }
}

fn run_replicate(
    config: &ExperimentConfig,
    generator: &Generator,
    window: &Window,
    r: usize,
    child: u64,
) -> Result<Vec<XiSample>> {
    let mut curve = match config.nesting {
        Nesting::Nested => {
            let z = generator.sample(child);
            xi_curve(&z, &config.weight, config.hermite_k, window, &config.mus)?
        }
        Nesting::Independent => config
            .mus
            .iter()
            .enumerate()
            .map(|(j, &mu)| {
                let z = generator.sample(mix(child, j as u64));
                let x = transform_field(&z, &config.weight, config.hermite_k)?;
                xi_estimate(&x, window, mu)
            })
            .collect::<Result<Vec<_>>>()?,
    };
    for s in curve.iter_mut() {
        s.replicate_id = r;
    }
    Ok(curve)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let start = Instant::now();
    let grid = config.grid()?;
    let generator = Generator::new(config, grid)?;
    let window = config.window();
    let child_seeds: Vec<u64> = (0..config.replicates as u64)
        .map(|r| mix(config.seed, r))
        .collect();

    let work = || -> Result<Vec<Vec<XiSample>>> {
        child_seeds
            .par_iter()
            .enumerate()
            .map(|(r, &child)| {
                run_replicate(config, &generator, &window, r, child).map_err(|e| Error::Replicate {
                    replicate: r,
                    source: Box::new(e),
                })
            })
            .collect()
    };
    let curves = if config.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| Error::Input(format!("thread pool: {e}")))?
            .install(work)?
    } else {
        work()?
    };

    let samples: Vec<Vec<XiSample>> = (0..config.mus.len())
        .map(|j| curves.iter().map(|c| c[j]).collect())
        .collect();
    let summaries = samples
        .iter()
        .zip(&config.mus)
        .map(|(s, &mu)| summarize(mu, &s.iter().map(|x| x.value).collect::<Vec<_>>()))
        .collect();
    Ok(ExperimentResult {
        config: config.clone(),
        samples,
        summaries,
        child_seeds,
        embedding: generator.report(),
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmseRow {
    pub mu: f64,
    pub rmse: f64,
}

pub fn rmse_table(result: &ExperimentResult) -> Vec<RmseRow> {
    result
        .summaries
        .iter()
        .map(|s| RmseRow {
            mu: s.mu,
            rmse: s.rmse,
        })
        .collect()
}

/// RMSE rows computed directly from per-`mu` sample vectors.
pub fn rmse_rows(mus: &[f64], samples: &[Vec<f64>]) -> Vec<RmseRow> {
    mus.iter()
        .zip(samples)
        .map(|(&mu, xs)| RmseRow {
            mu,
            rmse: stats::moments(xs).mean_square.sqrt(),
        })
        .collect()
}

pub fn is_strictly_decreasing(rows: &[RmseRow]) -> bool {
    rows.windows(2).all(|w| w[1].rmse < w[0].rmse)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub mu: f64,
    pub rmse: f64,
    pub rel_tol: f64,
}

pub fn reference_rows(rel_tol: f64) -> Vec<ReferenceRow> {
    REFERENCE_RMSE
        .iter()
        .map(|&(mu, rmse)| ReferenceRow { mu, rmse, rel_tol })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct RowVerdict {
    pub mu: f64,
    pub rmse: f64,
    pub reference: f64,
    pub rel_error: f64,
    pub rel_tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub rows: Vec<RowVerdict>,
    /// Log-log slope of the compared RMSE values against `mu`.
    pub slope: Option<f64>,
    pub reference_slope: Option<f64>,
    pub all_pass: bool,
}

pub fn compare_to_reference(table: &[RmseRow], reference: &[ReferenceRow]) -> Result<ComparisonReport> {
    let mut rows = Vec::new();
    for r in table {
        if let Some(re) = reference
            .iter()
            .find(|re| (re.mu - r.mu).abs() <= 1e-9 * re.mu.abs().max(1.0))
        {
            let rel_error = (r.rmse - re.rmse).abs() / re.rmse;
            rows.push(RowVerdict {
                mu: r.mu,
                rmse: r.rmse,
                reference: re.rmse,
                rel_error,
                rel_tol: re.rel_tol,
                pass: rel_error <= re.rel_tol,
            });
        }
    }
    if rows.is_empty() {
        return Err(Error::Input("no mu values shared with the reference".into()));
    }
    let (slope, reference_slope) = if rows.len() >= 2 {
        let mus: Vec<f64> = rows.iter().map(|r| r.mu).collect();
        let ours: Vec<f64> = rows.iter().map(|r| r.rmse).collect();
        let theirs: Vec<f64> = rows.iter().map(|r| r.reference).collect();
        (
            Some(stats::log_log_slope(&mus, &ours)),
            Some(stats::log_log_slope(&mus, &theirs)),
        )
    } else {
        (None, None)
    };
    let all_pass = rows.iter().all(|r| r.pass);
    Ok(ComparisonReport {
        rows,
        slope,
        reference_slope,
        all_pass,
    })
}

/// `max_mu Var(ξ(mu)) / bound(mu, C = 1)`.
pub fn fit_variance_constant(mus: &[f64], variances: &[f64], params: &RegimeParams) -> f64 {
    mus.iter()
        .zip(variances)
        .map(|(&mu, &v)| v / variance_upper_bound(mu, params, 1.0))
        .fold(0.0, f64::max)
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

pub fn write_samples_csv<W: Write>(result: &ExperimentResult, mut out: W) -> Result<()> {
    writeln!(out, "mu,replicate,xi,node_count")?;
    for per_mu in &result.samples {
        for s in per_mu {
            writeln!(
                out,
                "{},{},{},{}",
                fmt(s.mu),
                s.replicate_id,
                fmt(s.value),
                s.node_count
            )?;
        }
    }
    Ok(())
}

pub fn write_summary_csv<W: Write>(summaries: &[MuSummary], mut out: W) -> Result<()> {
    writeln!(out, "mu,rmse,mean,var,skew,kurt,{}", QUANTILE_LABELS.join(","))?;
    for s in summaries {
        let qs: Vec<String> = s.quantiles.iter().map(|q| fmt(q.1)).collect();
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt(s.mu),
            fmt(s.rmse),
            fmt(s.moments.mean),
            fmt(s.moments.variance),
            fmt(s.moments.skewness),
            fmt(s.moments.excess_kurtosis),
            qs.join(",")
        )?;
    }
    Ok(())
}

pub fn write_qq_csv<W: Write>(per_mu: &[(f64, DistributionSummary)], mut out: W) -> Result<()> {
    writeln!(out, "mu,theoretical_quantile,sample_quantile")?;
    for (mu, summary) in per_mu {
        for p in &summary.qq {
            writeln!(
                out,
                "{},{},{}",
                fmt(*mu),
                fmt(p.theoretical_quantile),
                fmt(p.sample_quantile)
            )?;
        }
    }
    Ok(())
}

pub fn write_rmse_csv<W: Write>(rows: &[RmseRow], mut out: W) -> Result<()> {
    writeln!(out, "mu,rmse")?;
    for r in rows {
        writeln!(out, "{},{}", fmt(r.mu), fmt(r.rmse))?;
    }
    Ok(())
}

/// Normality diagnostics for every `mu` with enough non-degenerate samples.
pub fn distribution_summaries(result: &ExperimentResult) -> Vec<(f64, Result<DistributionSummary>)> {
    result
        .config
        .mus
        .iter()
        .enumerate()
        .map(|(j, &mu)| (mu, distribution_summary(&result.values_at(j))))
        .collect()
}

/// Writes `samples.csv`, `summary.csv`, `qq.csv` and `meta.json` into `dir`.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = create(dir, "samples.csv")?;
    write_samples_csv(result, &mut w)?;
    w.flush()?;
    let mut w = create(dir, "summary.csv")?;
    write_summary_csv(&result.summaries, &mut w)?;
    w.flush()?;

    let diagnostics = distribution_summaries(result);
    let ok: Vec<(f64, DistributionSummary)> = diagnostics
        .iter()
        .filter_map(|(mu, d)| d.as_ref().ok().map(|d| (*mu, d.clone())))
        .collect();
    let mut w = create(dir, "qq.csv")?;
    write_qq_csv(&ok, &mut w)?;
    w.flush()?;

    let normality: Vec<serde_json::Value> = diagnostics
        .iter()
        .map(|(mu, d)| match d {
            Ok(d) => serde_json::json!({
                "mu": mu,
                "skewness": d.moments.skewness,
                "skewness_se": d.skewness_se,
                "excess_kurtosis": d.moments.excess_kurtosis,
                "kurtosis_se": d.kurtosis_se,
                "omnibus": d.omnibus,
                "omnibus_p": d.omnibus_p,
            }),
            Err(e) => serde_json::json!({ "mu": mu, "skipped": e.to_string() }),
        })
        .collect();
    let meta = serde_json::json!({
        "config": result.config,
        "child_seeds": result.child_seeds,
        "embedding": result.embedding,
        "clipped_mass": result.embedding.as_ref().map(|e| e.clipped_mass),
        "normality": normality,
        "elapsed_seconds": result.elapsed_seconds,
        "versions": { "field-slln": env!("CARGO_PKG_VERSION") },
    });
    let mut w = create(dir, "meta.json")?;
    serde_json::to_writer_pretty(&mut w, &meta)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Reads a `samples.csv` back into `(mus, samples per mu)`, with replicates in
/// file order.
pub fn read_samples_csv(path: &Path) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let reader = BufReader::new(File::open(path)?);
    let mut mus: Vec<f64> = Vec::new();
    let mut samples: Vec<Vec<f64>> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != "mu,replicate,xi,node_count" {
                return Err(Error::Input(format!("unexpected samples header `{line}`")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Input(format!("line {}: expected 4 fields", i + 1)));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Input(format!("line {}: bad number `{s}`", i + 1)))
        };
        let mu = parse(fields[0])?;
        let xi = parse(fields[2])?;
        match mus.iter().position(|&m| m == mu) {
            Some(j) => samples[j].push(xi),
            None => {
                mus.push(mu);
                samples.push(vec![xi]);
            }
        }
    }
    Ok((mus, samples))
}

/// Reads `mu,rmse[,rel_tol]` reference rows; `default_tol` fills a missing column.
pub fn read_reference_csv(path: &Path, default_tol: f64) -> Result<Vec<ReferenceRow>> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if i == 0 && fields[0] == "mu" {
            continue;
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Input(format!("reference line {}: bad number `{s}`", i + 1)))
        };
        if fields.len() < 2 {
            return Err(Error::Input(format!("reference line {}: expected mu,rmse", i + 1)));
        }
        rows.push(ReferenceRow {
            mu: num(fields[0])?,
            rmse: num(fields[1])?,
            rel_tol: match fields.get(2) {
                Some(t) => num(t)?,
                None => default_tol,
            },
        });
    }
    Ok(rows)
}
