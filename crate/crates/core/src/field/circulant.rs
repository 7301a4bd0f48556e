//! Circulant (d = 1) and block-circulant (d = 2) embedding samplers.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{FieldRealization, GeneratorTag, Grid};
use crate::covariance::CovarianceModel;
use crate::error::{Error, Result};
use crate::rng::GaussianStream;

/// Padding multipliers applied to the minimal embedding size `2 (n - 1)`.
const PADDING_SCHEDULE: [f64; 5] = [1.0, 1.5, 2.0, 3.0, 4.0];

/// Negative spectral mass below this is floating-point noise.
const ROUNDOFF_MASS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingMode {
    Strict,
    Clip,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingPolicy {
    pub mode: EmbeddingMode,
    /// Largest tolerated `Σ|λ⁻| / Σ|λ|` when clipping.
    pub clip_report_threshold: f64,
}

impl Default for EmbeddingPolicy {
    fn default() -> Self {
        Self {
            mode: EmbeddingMode::Clip,
            clip_report_threshold: 1e-3,
        }
    }
}

impl EmbeddingPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.clip_report_threshold) {
            return Err(Error::domain(
                "gen.clip_threshold",
                "threshold must lie in [0, 1)",
            ));
        }
        Ok(())
    }
}

/// Outcome of the padding search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    /// Periodic lattice size per axis that was used.
    pub size: usize,
    /// `(size, relative negative mass)` for every padding tried, in order.
    pub tried: Vec<(usize, f64)>,
    /// Relative spectral mass zeroed out (0 when the embedding was admissible).
    pub clipped_mass: f64,
}

/// Smallest even 5-smooth integer `>= n`.
fn fast_even_size(n: usize) -> usize {
    let mut m = n.max(2);
    loop {
        if m % 2 == 0 {
            let mut r = m;
            for p in [2, 3, 5] {
                while r % p == 0 {
                    r /= p;
                }
            }
            if r == 1 {
                return m;
            }
        }
        m += 1;
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], m: usize) {
    for i in 0..m {
        for j in 0..m {
            dst[j * m + i] = src[i * m + j];
        }
    }
}

/// In-place forward DFT over a `m^d` row-major array. For `d = 2` the result is
/// left transposed in `buf` (element `(i, j)` at `j * m + i`).
fn fft_nd(fft: &Arc<dyn Fft<f64>>, buf: &mut [Complex64], scratch: &mut [Complex64], m: usize, d: usize) {
    fft.process(buf);
    if d == 2 {
        transpose(buf, scratch, m);
        fft.process(scratch);
        buf.copy_from_slice(scratch);
    }
}

struct Spectrum {
    size: usize,
    eigenvalues: Vec<f64>,
    negative_mass: f64,
}

fn embedding_spectrum(model: &CovarianceModel, grid: &Grid, m: usize) -> Spectrum {
    let d = grid.dim();
    let h = grid.step();
    let total = m.pow(d as u32);
    let wrap = |i: usize| i.min(m - i) as f64 * h;
    let mut buf: Vec<Complex64> = (0..total)
        .map(|p| {
            let r = if d == 1 {
                wrap(p)
            } else {
                let (a, b) = (wrap(p / m), wrap(p % m));
                (a * a + b * b).sqrt()
            };
            Complex64::new(model.value(r), 0.0)
        })
        .collect();
    let mut scratch = vec![Complex64::new(0.0, 0.0); if d == 2 { total } else { 0 }];
    let fft = FftPlanner::new().plan_fft_forward(m);
    fft_nd(&fft, &mut buf, &mut scratch, m, d);
    let eigenvalues: Vec<f64> = buf.iter().map(|c| c.re).collect();
    let (neg, abs) = eigenvalues
        .iter()
        .fold((0.0, 0.0), |(n, a), &l| (if l < 0.0 { n - l } else { n }, a + l.abs()));
    Spectrum {
        size: m,
        eigenvalues,
        negative_mass: if abs > 0.0 { neg / abs } else { 0.0 },
    }
}

/// Sampler holding the square-rooted embedding spectrum; build once, then draw
/// any number of realizations.
pub struct CirculantGenerator {
    grid: Grid,
    size: usize,
    amplitudes: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    report: EmbeddingReport,
}

impl std::fmt::Debug for CirculantGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantGenerator")
            .field("grid", &self.grid)
            .field("report", &self.report)
            .finish()
    }
}

impl CirculantGenerator {
    pub fn new(model: &CovarianceModel, grid: Grid, policy: EmbeddingPolicy) -> Result<Self> {
        model.validate()?;
        policy.validate()?;
        let n = grid.nodes_per_axis();
        let base = (2 * (n - 1)).max(2);
        let mut tried = Vec::new();
        let mut best: Option<Spectrum> = None;
        for &factor in &PADDING_SCHEDULE {
            let m = fast_even_size((factor * base as f64).ceil() as usize);
            if tried.iter().any(|&(s, _)| s == m) {
                continue;
            }
            let spec = embedding_spectrum(model, &grid, m);
            tried.push((m, spec.negative_mass));
            let done = spec.negative_mass <= ROUNDOFF_MASS;
            if best
                .as_ref()
                .is_none_or(|b| spec.negative_mass < b.negative_mass)
            {
                best = Some(spec);
            }
            if done {
                break;
            }
        }
        let spec = best.expect("padding schedule is nonempty");
        let mass = spec.negative_mass;
        let clipped_mass = if mass <= ROUNDOFF_MASS {
            0.0
        } else {
            match policy.mode {
                EmbeddingMode::Strict => return Err(Error::Embedding { negative_mass: mass }),
                EmbeddingMode::Clip if mass > policy.clip_report_threshold => {
                    return Err(Error::EmbeddingAccuracy {
                        clipped_mass: mass,
                        threshold: policy.clip_report_threshold,
                    })
                }
                EmbeddingMode::Clip => mass,
            }
        };
        let total = spec.eigenvalues.len() as f64;
        let amplitudes = spec
            .eigenvalues
            .iter()
            .map(|&l| (l.max(0.0) / total).sqrt())
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(spec.size);
        Ok(Self {
            grid,
            size: spec.size,
            amplitudes,
            fft,
            report: EmbeddingReport {
                size: spec.size,
                tried,
                clipped_mass,
            },
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn report(&self) -> &EmbeddingReport {
        &self.report
    }

    pub fn sample(&self, seed: u64) -> FieldRealization {
        let d = self.grid.dim();
        let m = self.size;
        let n = self.grid.nodes_per_axis();
        let mut stream = GaussianStream::new(seed);
        let mut buf: Vec<Complex64> = self
            .amplitudes
            .iter()
            .map(|&a| {
                let re = stream.normal();
                let im = stream.normal();
                Complex64::new(a * re, a * im)
            })
            .collect();
        let mut scratch = vec![Complex64::new(0.0, 0.0); if d == 2 { buf.len() } else { 0 }];
        fft_nd(&self.fft, &mut buf, &mut scratch, m, d);
        let values = if d == 1 {
            buf[..n].iter().map(|c| c.re).collect()
        } else {
            let mut v = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    v.push(buf[j * m + i].re);
                }
            }
            v
        };
        FieldRealization {
            grid: self.grid,
            values,
            seed,
            generator: GeneratorTag::Circulant,
            hermite_order: None,
        }
    }
}

pub fn generate_circulant(
    model: &CovarianceModel,
    grid: Grid,
    seed: u64,
    policy: EmbeddingPolicy,
) -> Result<FieldRealization> {
    Ok(CirculantGenerator::new(model, grid, policy)?.sample(seed))
}
