//! Observation windows, the Hermite-weighted transform and Riemann-sum
//! estimates of the normalized integral functional.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldRealization;
use crate::hermite::{hermite_eval, HermiteOrder, WeightFunction};

pub type Membership = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// Shape of the unit window `Δ = Δ(1)`.
#[derive(Clone)]
pub enum WindowShape {
    /// `|s_i| <= 1` for every axis.
    Square,
    /// `|s| <= 1`.
    Disk,
    /// Caller-supplied membership of `Δ`, with the half-width of its bounding box.
    Indicator { contains: Membership, half_extent: f64 },
}

impl fmt::Debug for WindowShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WindowShape::Square => write!(f, "Square"),
            WindowShape::Disk => write!(f, "Disk"),
            WindowShape::Indicator { half_extent, .. } => {
                write!(f, "Indicator {{ half_extent: {half_extent} }}")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Window {
    shape: WindowShape,
    d: usize,
}

impl Window {
    pub fn square(d: usize) -> Self {
        Self {
            shape: WindowShape::Square,
            d,
        }
    }

    pub fn disk(d: usize) -> Self {
        Self {
            shape: WindowShape::Disk,
            d,
        }
    }

    /// `contains` must accept the origin.
    pub fn indicator(d: usize, half_extent: f64, contains: Membership) -> Result<Self> {
        if !(half_extent > 0.0 && half_extent.is_finite()) {
            return Err(Error::domain("window", "half extent must be positive"));
        }
        if !contains(&vec![0.0; d]) {
            return Err(Error::domain("window", "window must contain the origin"));
        }
        Ok(Self {
            shape: WindowShape::Indicator {
                contains,
                half_extent,
            },
            d,
        })
    }

    pub fn shape(&self) -> &WindowShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Half-width of the axis-aligned box enclosing `Δ(1)`.
    pub fn half_extent(&self) -> f64 {
        match &self.shape {
            WindowShape::Square | WindowShape::Disk => 1.0,
            WindowShape::Indicator { half_extent, .. } => *half_extent,
        }
    }

    /// Closed membership of `s` in `Δ(mu)`.
    #[inline]
    pub fn contains(&self, s: &[f64], mu: f64) -> bool {
        match &self.shape {
            WindowShape::Square => s.iter().all(|x| x.abs() <= mu),
            WindowShape::Disk => s.iter().map(|x| x * x).sum::<f64>() <= mu * mu,
            WindowShape::Indicator { contains, .. } => {
                let scaled: Vec<f64> = s.iter().map(|x| x / mu).collect();
                contains(&scaled)
            }
        }
    }
}

/// One evaluation of `ξ(μ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiSample {
    pub mu: f64,
    pub value: f64,
    pub replicate_id: usize,
    pub node_count: usize,
}

/// Nodewise `X = g H_k(Z)`.
pub fn transform_field(z: &FieldRealization, g: &WeightFunction, k: u32) -> Result<FieldRealization> {
    if k == 0 {
        return Err(Error::domain("hermite.k", "order must be at least 1"));
    }
    let grid = z.grid();
    if let Some(dg) = g.dimension() {
        if dg != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                got: dg,
            });
        }
    }
    let order = HermiteOrder(k);
    let n = grid.nodes_per_axis();
    let mut values = Vec::with_capacity(z.values().len());
    let mut point = vec![0.0; grid.dim()];
    if grid.dim() == 1 {
        for i in 0..n {
            point[0] = grid.coord(i);
            values.push(g.value(&point) * hermite_eval(order, z.at(i, 0)));
        }
    } else {
        for i in 0..n {
            point[0] = grid.coord(i);
            for j in 0..n {
                point[1] = grid.coord(j);
                values.push(g.value(&point) * hermite_eval(order, z.at(i, j)));
            }
        }
    }
    Ok(z.transformed(values, k))
}

fn check_coverage(x: &FieldRealization, window: &Window, mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::domain("mu", "must be positive"));
    }
    if window.dim() != x.grid().dim() {
        return Err(Error::DimensionMismatch {
            expected: x.grid().dim(),
            got: window.dim(),
        });
    }
    let required = mu * window.half_extent();
    let available = x.grid().extent();
    if required > available * (1.0 + 1e-12) {
        return Err(Error::Coverage {
            required,
            available,
        });
    }
    Ok(())
}

/// Sum of `X` over the nodes of `Δ(mu)` and the node count.
fn window_sum(x: &FieldRealization, window: &Window, mu: f64) -> (f64, usize) {
    let grid = x.grid();
    let n = grid.nodes_per_axis();
    let big_n = grid.half_extent();
    let reach = ((mu * window.half_extent() / grid.step()).floor() as usize + 1).min(big_n);
    let (lo, hi) = (big_n - reach, big_n + reach);
    let mut sum = 0.0;
    let mut count = 0;
    let mut point = vec![0.0; grid.dim()];
    for i in lo..=hi.min(n - 1) {
        point[0] = grid.coord(i);
        if grid.dim() == 1 {
            if window.contains(&point, mu) {
                sum += x.at(i, 0);
                count += 1;
            }
            continue;
        }
        for j in lo..=hi.min(n - 1) {
            point[1] = grid.coord(j);
            if window.contains(&point, mu) {
                sum += x.at(i, j);
                count += 1;
            }
        }
    }
    (sum, count)
}

/// `ξ(μ) ≈ (h/μ)^d Σ_{x_p ∈ Δ(μ)} X(x_p)`.
pub fn xi_estimate(x: &FieldRealization, window: &Window, mu: f64) -> Result<XiSample> {
    check_coverage(x, window, mu)?;
    let (sum, node_count) = window_sum(x, window, mu);
    if node_count == 0 {
        return Err(Error::DegenerateWindow { mu });
    }
    let d = x.grid().dim() as i32;
    let value = sum * (x.grid().step() / mu).powi(d);
    Ok(XiSample {
        mu,
        value,
        replicate_id: 0,
        node_count,
    })
}

/// `ξ` at each `mu` of an already transformed field (nested windows).
pub fn xi_curve_of(x: &FieldRealization, window: &Window, mus: &[f64]) -> Result<Vec<XiSample>> {
    if mus.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Input("mus must be strictly increasing".into()));
    }
    mus.iter().map(|&mu| xi_estimate(x, window, mu)).collect()
}

/// Transforms `z` once and evaluates `ξ` on the nested windows `Δ(mu)`.
pub fn xi_curve(
    z: &FieldRealization,
    g: &WeightFunction,
    k: u32,
    window: &Window,
    mus: &[f64],
) -> Result<Vec<XiSample>> {
    if let Some(&last) = mus.last() {
        check_coverage(z, window, last)?;
    }
    let x = transform_field(z, g, k)?;
    xi_curve_of(&x, window, mus)
}
