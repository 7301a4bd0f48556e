//! Gaussian random fields on regular node-centred grids.

mod audit;
mod cholesky;
mod circulant;
mod export;

pub use audit::{empirical_cov_audit, CovAudit, DefectEstimate, LagEstimate};
pub use cholesky::{generate_cholesky, CholeskyGenerator, CHOLESKY_NODE_LIMIT};
pub use circulant::{
    generate_circulant, CirculantGenerator, EmbeddingMode, EmbeddingPolicy, EmbeddingReport,
};
pub use export::{read_binary, write_binary, write_csv};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodes at `(i h)` for `i` in `[-N, N]` along each of `d` axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    d: usize,
    h: f64,
    half_extent: usize,
}

impl Grid {
    pub fn new(d: usize, h: f64, half_extent: usize) -> Result<Self> {
        if !(d == 1 || d == 2) {
            return Err(Error::domain("dim", "simulation supports d = 1 or d = 2"));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::domain("grid.h", "step must be positive"));
        }
        Ok(Self { d, h, half_extent })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn half_extent(&self) -> usize {
        self.half_extent
    }

    pub fn nodes_per_axis(&self) -> usize {
        2 * self.half_extent + 1
    }

    pub fn node_count(&self) -> usize {
        self.nodes_per_axis().pow(self.d as u32)
    }

    /// Half-width `N h` of the simulated square or interval.
    pub fn extent(&self) -> f64 {
        self.half_extent as f64 * self.h
    }

    /// Coordinate of axis index `a` in `[0, 2N]`.
    #[inline]
    pub fn coord(&self, a: usize) -> f64 {
        (a as f64 - self.half_extent as f64) * self.h
    }

    /// Axis indices of a flat (row-major) node index.
    #[inline]
    pub fn axis_indices(&self, flat: usize) -> [usize; 2] {
        let n = self.nodes_per_axis();
        if self.d == 1 {
            [flat, 0]
        } else {
            [flat / n, flat % n]
        }
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let idx = self.axis_indices(flat);
        (0..self.d).map(|k| self.coord(idx[k])).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorTag {
    Cholesky,
    Circulant,
}

/// Values of a field on a grid, with the seed and generator that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRealization {
    grid: Grid,
    values: Vec<f64>,
    seed: u64,
    generator: GeneratorTag,
    hermite_order: Option<u32>,
}

impl FieldRealization {
    pub fn new(grid: Grid, values: Vec<f64>, seed: u64, generator: GeneratorTag) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::Input(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("field values must be finite".into()));
        }
        Ok(Self {
            grid,
            values,
            seed,
            generator,
            hermite_order: None,
        })
    }

    pub(crate) fn transformed(&self, values: Vec<f64>, k: u32) -> Self {
        Self {
            grid: self.grid,
            values,
            seed: self.seed,
            generator: self.generator,
            hermite_order: Some(k),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn generator(&self) -> GeneratorTag {
        self.generator
    }

    /// Hermite order of the transform applied, if any.
    pub fn hermite_order(&self) -> Option<u32> {
        self.hermite_order
    }

    pub fn is_transformed(&self) -> bool {
        self.hermite_order.is_some()
    }

    /// Value at axis indices (second index ignored for `d = 1`).
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        if self.grid.d == 1 {
            self.values[i]
        } else {
            self.values[i * self.grid.nodes_per_axis() + j]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_geometry() {
        let g = Grid::new(2, 0.25, 4).unwrap();
        assert_eq!(g.nodes_per_axis(), 9);
        assert_eq!(g.node_count(), 81);
        assert_eq!(g.extent(), 1.0);
        assert_eq!(g.point(0), vec![-1.0, -1.0]);
        assert_eq!(g.point(40), vec![0.0, 0.0]);
        assert_eq!(g.point(80), vec![1.0, 1.0]);
        assert!(Grid::new(3, 0.5, 2).is_err());
        assert!(Grid::new(2, 0.0, 2).is_err());
    }

    #[test]
    fn realization_checks_shape() {
        let g = Grid::new(1, 1.0, 1).unwrap();
        assert!(FieldRealization::new(g, vec![0.0; 2], 0, GeneratorTag::Cholesky).is_err());
        assert!(FieldRealization::new(g, vec![0.0, f64::NAN, 0.0], 0, GeneratorTag::Cholesky)
            .is_err());
        assert!(FieldRealization::new(g, vec![0.0; 3], 0, GeneratorTag::Cholesky).is_ok());
    }
}
