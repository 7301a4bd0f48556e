use nalgebra::{Cholesky, DMatrix, DVector};

use super::{FieldRealization, GeneratorTag, Grid};
use crate::covariance::{distance, CovarianceModel};
use crate::error::{Error, Result};
use crate::rng::GaussianStream;

/// Largest grid the dense generator accepts.
pub const CHOLESKY_NODE_LIMIT: usize = 10_000;

const JITTERS: [f64; 4] = [0.0, 1e-12, 1e-10, 1e-8];

/// Exact sampler: factors the full covariance matrix once and reuses it.
#[derive(Debug, Clone)]
pub struct CholeskyGenerator {
    grid: Grid,
    lower: DMatrix<f64>,
    jitter: f64,
}

impl CholeskyGenerator {
    pub fn new(model: &CovarianceModel, grid: Grid) -> Result<Self> {
        model.validate()?;
        let n = grid.node_count();
        if n > CHOLESKY_NODE_LIMIT {
            return Err(Error::GridTooLarge {
                nodes: n,
                limit: CHOLESKY_NODE_LIMIT,
            });
        }
        let points: Vec<Vec<f64>> = (0..n).map(|p| grid.point(p)).collect();
        let cov = DMatrix::from_fn(n, n, |p, q| model.value(distance(&points[p], &points[q])));
        for &jitter in &JITTERS {
            let mut m = cov.clone();
            for p in 0..n {
                m[(p, p)] += jitter;
            }
            if let Some(ch) = Cholesky::new(m) {
                return Ok(Self {
                    grid,
                    lower: ch.unpack(),
                    jitter,
                });
            }
        }
        Err(Error::NotPositiveDefinite {
            jitter: JITTERS[JITTERS.len() - 1],
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Diagonal jitter that was needed for the factorization.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn sample(&self, seed: u64) -> FieldRealization {
        let n = self.grid.node_count();
        let mut stream = GaussianStream::new(seed);
        let mut w = vec![0.0; n];
        stream.fill_normal(&mut w);
        let z = &self.lower * DVector::from_vec(w);
        FieldRealization {
            grid: self.grid,
            values: z.as_slice().to_vec(),
            seed,
            generator: GeneratorTag::Cholesky,
            hermite_order: None,
        }
    }
}

pub fn generate_cholesky(model: &CovarianceModel, grid: Grid, seed: u64) -> Result<FieldRealization> {
    Ok(CholeskyGenerator::new(model, grid)?.sample(seed))
}
