//! Flat `key = value` experiment configuration.
//!
//! One assignment per line, `#` starts a comment, lists are comma-separated.
//! Keys are resolved over a profile base (`reduced` unless `profile = full`),
//! then `--set` overrides are applied on top of the file.

use std::collections::BTreeMap;
use std::path::PathBuf;

use field_slln::covariance::{CovarianceModel, SlowlyVarying};
use field_slln::field::{EmbeddingMode, EmbeddingPolicy};
use field_slln::harness::{ExperimentConfig, GeneratorKind, Nesting, WindowKind};
use field_slln::hermite::WeightFunction;

use crate::error::CliError;

pub const SEED_ENV: &str = "FIELD_SLLN_SEED";

pub const KEYS: &[&str] = &[
    "profile",
    "dim",
    "cov.kind",
    "cov.beta",
    "cov.L.kind",
    "cov.L.c",
    "cov.L.p",
    "cov.L.q",
    "cov.rmin",
    "weight.kind",
    "weight.c",
    "weight.l",
    "weight.q",
    "hermite.k",
    "grid.h",
    "grid.N",
    "gen.kind",
    "gen.embedding",
    "gen.clip_threshold",
    "seed",
    "window.kind",
    "mus",
    "replicates",
    "nesting",
    "threads",
    "output.dir",
];

/// Keys that only make sense for one kind of a tagged group; dropped from the
/// profile base when the user picks a different kind.
const KIND_GROUPS: &[(&str, &[&str])] = &[
    ("cov.kind", &["cov.L.kind", "cov.L.c", "cov.L.p", "cov.L.q", "cov.rmin"]),
    ("cov.L.kind", &["cov.L.c", "cov.L.p", "cov.L.q"]),
    ("weight.kind", &["weight.c", "weight.l", "weight.q"]),
];

type Entries = BTreeMap<String, String>;

fn invalid(key: &str, message: impl Into<String>) -> CliError {
    CliError::validation(Some(key), message)
}

fn parse_line(line: &str, lineno: Option<usize>) -> Result<Option<(String, String)>, CliError> {
    let line = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
    .trim();
    if line.is_empty() {
        return Ok(None);
    }
    let Some((key, value)) = line.split_once('=') else {
        let at = lineno.map(|n| format!("line {n}: ")).unwrap_or_default();
        return Err(CliError::validation(None, format!("{at}expected `key = value`, got `{line}`")));
    };
    let key = key.trim();
    if !KEYS.contains(&key) {
        return Err(invalid(key, "unknown key"));
    }
    Ok(Some((key.to_string(), value.trim().to_string())))
}

/// Parses config text into raw entries; later assignments win.
pub fn parse_entries(text: &str) -> Result<Entries, CliError> {
    let mut out = Entries::new();
    for (i, line) in text.lines().enumerate() {
        if let Some((k, v)) = parse_line(line, Some(i + 1))? {
            out.insert(k, v);
        }
    }
    Ok(out)
}

/// Parses `key=value` overrides as given to `--set`.
pub fn parse_overrides(overrides: &[String]) -> Result<Entries, CliError> {
    let mut out = Entries::new();
    for o in overrides {
        match parse_line(o, None)? {
            Some((k, v)) => {
                out.insert(k, v);
            }
            None => return Err(CliError::validation(None, format!("empty override `{o}`"))),
        }
    }
    Ok(out)
}

fn base_entries(profile: &str) -> Result<Entries, CliError> {
    let base = match profile {
        "reduced" => ExperimentConfig::reduced(0),
        "full" => ExperimentConfig::full(0),
        other => return Err(invalid("profile", format!("expected reduced or full, got `{other}`"))),
    };
    let mut entries = parse_entries(&emit(&base))?;
    entries.remove("seed");
    Ok(entries)
}

struct Reader {
    entries: Entries,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    fn required(&mut self, key: &str) -> Result<String, CliError> {
        self.take(key).ok_or_else(|| invalid(key, "missing value"))
    }

    fn f64(&mut self, key: &str) -> Result<f64, CliError> {
        let v = self.required(key)?;
        v.parse()
            .map_err(|_| invalid(key, format!("expected a number, got `{v}`")))
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.entries.contains_key(key) {
            true => self.f64(key),
            false => Ok(default),
        }
    }

    fn uint<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, CliError> {
        let v = self.required(key)?;
        v.parse()
            .map_err(|_| invalid(key, format!("expected a nonnegative integer, got `{v}`")))
    }

    fn list(&mut self, key: &str) -> Result<Vec<f64>, CliError> {
        let v = self.required(key)?;
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| invalid(key, format!("expected a list of numbers, got `{v}`")))
            })
            .collect()
    }

    fn choice<T: Copy>(&mut self, key: &str, options: &[(&str, T)]) -> Result<T, CliError> {
        let v = self.required(key)?;
        options
            .iter()
            .find(|(name, _)| *name == v)
            .map(|(_, t)| *t)
            .ok_or_else(|| {
                let names: Vec<&str> = options.iter().map(|o| o.0).collect();
                invalid(key, format!("expected one of {}, got `{v}`", names.join(", ")))
            })
    }
}

#[derive(Clone, Copy)]
enum CovKind {
    Cauchy,
    PowerLaw,
}

#[derive(Clone, Copy)]
enum LKind {
    Constant,
    LogPower,
}

#[derive(Clone, Copy)]
enum WeightKind {
    Constant,
    Monomial,
    LogProduct,
}

fn build(mut r: Reader) -> Result<(ExperimentConfig, Option<u64>), CliError> {
    let dim: usize = r.uint("dim")?;
    let beta = r.f64("cov.beta")?;
    let cov = match r.choice("cov.kind", &[("cauchy", CovKind::Cauchy), ("powerlaw", CovKind::PowerLaw)])? {
        CovKind::Cauchy => CovarianceModel::Cauchy { beta },
        CovKind::PowerLaw => {
            let lkind = match r.entries.contains_key("cov.L.kind") {
                true => r.choice("cov.L.kind", &[("constant", LKind::Constant), ("logpower", LKind::LogPower)])?,
                false => LKind::Constant,
            };
            let slowly_varying = match lkind {
                LKind::Constant => SlowlyVarying::Constant {
                    c: r.f64_or("cov.L.c", 1.0)?,
                },
                LKind::LogPower => SlowlyVarying::LogPower {
                    p: r.f64("cov.L.p")?,
                    q: r.f64("cov.L.q")?,
                },
            };
            CovarianceModel::PowerLaw {
                beta,
                slowly_varying,
                r_min: r.f64_or("cov.rmin", 1.0)?,
            }
        }
    };
    let weight = match r.choice(
        "weight.kind",
        &[
            ("constant", WeightKind::Constant),
            ("monomial", WeightKind::Monomial),
            ("logproduct", WeightKind::LogProduct),
        ],
    )? {
        WeightKind::Constant => WeightFunction::Constant {
            c: r.f64_or("weight.c", 1.0)?,
        },
        WeightKind::Monomial => WeightFunction::MonomialProduct {
            exponents: r.list("weight.l")?,
        },
        WeightKind::LogProduct => WeightFunction::LogProduct {
            offsets: r.list("weight.q")?,
        },
    };
    let embedding = EmbeddingPolicy {
        mode: r.choice("gen.embedding", &[("strict", EmbeddingMode::Strict), ("clip", EmbeddingMode::Clip)])?,
        clip_report_threshold: r.f64("gen.clip_threshold")?,
    };
    let seed = match r.entries.contains_key("seed") {
        true => Some(r.uint("seed")?),
        false => None,
    };
    let config = ExperimentConfig {
        dim,
        cov,
        weight,
        hermite_k: r.uint("hermite.k")?,
        window: r.choice("window.kind", &[("square", WindowKind::Square), ("disk", WindowKind::Disk)])?,
        grid_h: r.f64("grid.h")?,
        grid_n: r.uint("grid.N")?,
        mus: r.list("mus")?,
        replicates: r.uint("replicates")?,
        seed: seed.unwrap_or(0),
        generator: r.choice(
            "gen.kind",
            &[("cholesky", GeneratorKind::Cholesky), ("circulant", GeneratorKind::Circulant)],
        )?,
        embedding,
        nesting: r.choice("nesting", &[("nested", Nesting::Nested), ("independent", Nesting::Independent)])?,
        threads: r.uint("threads")?,
        output_dir: PathBuf::from(r.required("output.dir")?),
    };
    if let Some(key) = r.entries.keys().next() {
        return Err(invalid(key, "not used by the selected model kinds"));
    }
    Ok((config, seed))
}

/// Where the seed comes from, highest precedence first.
#[derive(Debug, Clone, Default)]
pub struct SeedSources {
    pub flag: Option<u64>,
    pub env: Option<String>,
}

/// Resolves a config from file text and overrides, applying the seed precedence
/// flag > environment > config, and validates the result.
pub fn parse_config(text: &str, overrides: &[String], seeds: &SeedSources) -> Result<ExperimentConfig, CliError> {
    let mut user = parse_entries(text)?;
    user.extend(parse_overrides(overrides)?);
    let profile = user.remove("profile").unwrap_or_else(|| "reduced".into());
    let mut entries = base_entries(&profile)?;
    for (kind_key, dependents) in KIND_GROUPS {
        if let Some(kind) = user.get(*kind_key) {
            if entries.get(*kind_key) != Some(kind) {
                for d in *dependents {
                    entries.remove(*d);
                }
            }
        }
    }
    entries.extend(user);
    let (mut config, file_seed) = build(Reader { entries })?;
    validate(&config)?;

    let env_seed = match &seeds.env {
        Some(v) => Some(v.trim().parse::<u64>().map_err(|_| {
            CliError::validation(Some(SEED_ENV), format!("expected an unsigned integer, got `{v}`"))
        })?),
        None => None,
    };
    config.seed = seeds
        .flag
        .or(env_seed)
        .or(file_seed)
        .ok_or_else(|| invalid("seed", "no seed given (use --seed, FIELD_SLLN_SEED or `seed =`)"))?;
    Ok(config)
}

/// Validates parameters, leaving runtime checks such as coverage to the run.
fn validate(config: &ExperimentConfig) -> Result<(), CliError> {
    match config.validate() {
        Err(e) if !e.is_runtime() => Err(e.into()),
        _ => Ok(()),
    }
}

fn list(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Writes every key of `config` so that [`parse_config`] reproduces it exactly.
pub fn emit(config: &ExperimentConfig) -> String {
    let mut lines = vec![format!("dim = {}", config.dim)];
    match &config.cov {
        CovarianceModel::Cauchy { beta } => {
            lines.push("cov.kind = cauchy".into());
            lines.push(format!("cov.beta = {beta}"));
        }
        CovarianceModel::PowerLaw {
            beta,
            slowly_varying,
            r_min,
        } => {
            lines.push("cov.kind = powerlaw".into());
            lines.push(format!("cov.beta = {beta}"));
            match slowly_varying {
                SlowlyVarying::Constant { c } => {
                    lines.push("cov.L.kind = constant".into());
                    lines.push(format!("cov.L.c = {c}"));
                }
                SlowlyVarying::LogPower { p, q } => {
                    lines.push("cov.L.kind = logpower".into());
                    lines.push(format!("cov.L.p = {p}"));
                    lines.push(format!("cov.L.q = {q}"));
                }
            }
            lines.push(format!("cov.rmin = {r_min}"));
        }
    }
    match &config.weight {
        WeightFunction::Constant { c } => {
            lines.push("weight.kind = constant".into());
            lines.push(format!("weight.c = {c}"));
        }
        WeightFunction::MonomialProduct { exponents } => {
            lines.push("weight.kind = monomial".into());
            lines.push(format!("weight.l = {}", list(exponents)));
        }
        WeightFunction::LogProduct { offsets } => {
            lines.push("weight.kind = logproduct".into());
            lines.push(format!("weight.q = {}", list(offsets)));
        }
    }
    lines.push(format!("hermite.k = {}", config.hermite_k));
    lines.push(format!("grid.h = {}", config.grid_h));
    lines.push(format!("grid.N = {}", config.grid_n));
    lines.push(format!(
        "gen.kind = {}",
        match config.generator {
            GeneratorKind::Cholesky => "cholesky",
            GeneratorKind::Circulant => "circulant",
        }
    ));
    lines.push(format!(
        "gen.embedding = {}",
        match config.embedding.mode {
            EmbeddingMode::Strict => "strict",
            EmbeddingMode::Clip => "clip",
        }
    ));
    lines.push(format!("gen.clip_threshold = {}", config.embedding.clip_report_threshold));
    lines.push(format!("seed = {}", config.seed));
    lines.push(format!(
        "window.kind = {}",
        match config.window {
            WindowKind::Square => "square",
            WindowKind::Disk => "disk",
        }
    ));
    lines.push(format!("mus = {}", list(&config.mus)));
    lines.push(format!("replicates = {}", config.replicates));
    lines.push(format!(
        "nesting = {}",
        match config.nesting {
            Nesting::Nested => "nested",
            Nesting::Independent => "independent",
        }
    ));
    lines.push(format!("threads = {}", config.threads));
    lines.push(format!("output.dir = {}", config.output_dir.display()));
    let mut text = lines.join("\n");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seeded(seed: u64) -> SeedSources {
        SeedSources {
            flag: Some(seed),
            env: None,
        }
    }

    #[test]
    fn minimal_config_resolves_to_reduced_default() {
        let c = parse_config("seed = 7\n", &[], &SeedSources::default()).unwrap();
        assert_eq!(c, ExperimentConfig::reduced(7));
    }

    #[test]
    fn full_profile() {
        let c = parse_config("profile = full # published scale\n", &[], &seeded(1)).unwrap();
        assert_eq!(c, ExperimentConfig::full(1));
    }

    #[test]
    fn overrides_apply_after_file() {
        let c = parse_config("grid.h = 0.5\nseed = 1", &["grid.h=0.25".into()], &SeedSources::default())
            .unwrap();
        assert_eq!(c.grid_h, 0.25);
    }

    #[test]
    fn rejects_unknown_and_invalid_keys() {
        let e = parse_config("colour = red", &[], &seeded(1)).unwrap_err();
        assert_eq!(e.key(), Some("colour"));
        let e = parse_config("", &["cov.beta=-1".into()], &seeded(1)).unwrap_err();
        assert_eq!(e.key(), Some("cov.beta"));
        assert_eq!(e.exit_code(), 1);
        let e = parse_config("mus = 10, x", &[], &seeded(1)).unwrap_err();
        assert_eq!(e.key(), Some("mus"));
        let e = parse_config("cov.L.p = 1", &[], &seeded(1)).unwrap_err();
        assert_eq!(e.key(), Some("cov.L.p"));
        let e = parse_config("just words", &[], &seeded(1)).unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn seed_precedence() {
        let text = "seed = 3";
        let env = |v: &str| Some(v.to_string());
        let s = |flag, env| SeedSources { flag, env };
        assert_eq!(parse_config(text, &[], &s(Some(1), env("2"))).unwrap().seed, 1);
        assert_eq!(parse_config(text, &[], &s(None, env("2"))).unwrap().seed, 2);
        assert_eq!(parse_config(text, &[], &s(None, None)).unwrap().seed, 3);
        let e = parse_config("", &[], &s(None, None)).unwrap_err();
        assert_eq!(e.key(), Some("seed"));
        assert!(parse_config(text, &[], &s(None, env("x"))).is_err());
    }

    #[test]
    fn switching_kinds_drops_base_keys() {
        let c = parse_config(
            "cov.kind = powerlaw\ncov.beta = 0.8\nweight.kind = constant",
            &[],
            &seeded(1),
        )
        .unwrap();
        assert_eq!(
            c.cov,
            CovarianceModel::PowerLaw {
                beta: 0.8,
                slowly_varying: SlowlyVarying::Constant { c: 1.0 },
                r_min: 1.0
            }
        );
        assert_eq!(c.weight, WeightFunction::Constant { c: 1.0 });
    }

    #[test]
    fn emit_round_trips() {
        let mut c = ExperimentConfig::full(99);
        c.cov = CovarianceModel::PowerLaw {
            beta: 0.7,
            slowly_varying: SlowlyVarying::LogPower { p: 0.3, q: 2.5 },
            r_min: 0.5,
        };
        c.weight = WeightFunction::LogProduct {
            offsets: vec![1.5, 3.0],
        };
        c.embedding.clip_report_threshold = 1e-4;
        c.nesting = Nesting::Independent;
        let back = parse_config(&emit(&c), &[], &SeedSources::default()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn coverage_is_left_to_the_run() {
        let c = parse_config("mus = 10, 500", &[], &seeded(1)).unwrap();
        assert_eq!(c.mus, vec![10.0, 500.0]);
    }
}
