//! Probabilists' Hermite polynomials and deterministic weight functions.

use serde::{Deserialize, Serialize};

use crate::covariance::norm;
use crate::error::{Error, Result};
use crate::rng::GaussianStream;

/// Highest order for which [`orthogonality_defect`] is trusted.
pub const MAX_QUADRATURE_ORDER: u32 = 10;

pub const DEFAULT_QUADRATURE_POINTS: usize = 64;

/// Slack added to `d` in the growth exponent of [`WeightFunction::LogProduct`];
/// absorbs the logarithmic factors.
pub const LOG_PRODUCT_SLACK: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HermiteOrder(pub u32);

impl From<u32> for HermiteOrder {
    fn from(m: u32) -> Self {
        HermiteOrder(m)
    }
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `H_m(u)` via `H_{m+1} = u H_m - m H_{m-1}`.
#[inline]
pub fn hermite_eval(m: HermiteOrder, u: f64) -> f64 {
    let m = m.0;
    if m == 0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, u);
    for j in 1..m {
        let next = u * cur - f64::from(j) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Nodes and weights integrating against the standard normal density:
/// `∫ f(u) φ(u) du ≈ Σ w_i f(x_i)`, exact for polynomials of degree `< 2n`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    // Newton iteration on orthonormal physicists' polynomials, then rescale to the
    // normal weight.
    const PIM4: f64 = 0.751_125_544_464_942_5;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-0.166_67),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = PIM4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    let scale = std::f64::consts::PI.sqrt().recip();
    let nodes = x.iter().rev().map(|v| v * std::f64::consts::SQRT_2).collect();
    let weights = w.iter().rev().map(|v| v * scale).collect();
    (nodes, weights)
}

/// `|∫ H_m1 H_m2 φ du - δ m1!|` by Gauss–Hermite quadrature.
pub fn orthogonality_defect(
    m1: HermiteOrder,
    m2: HermiteOrder,
    quadrature_points: usize,
) -> Result<f64> {
    if m1.0 > MAX_QUADRATURE_ORDER || m2.0 > MAX_QUADRATURE_ORDER {
        return Err(Error::domain(
            "hermite order",
            format!("orders above {MAX_QUADRATURE_ORDER} are outside the quadrature range"),
        ));
    }
    if quadrature_points == 0 {
        return Err(Error::domain("quadrature_points", "must be positive"));
    }
    let (nodes, weights) = gauss_hermite(quadrature_points);
    let integral: f64 = nodes
        .iter()
        .zip(&weights)
        .map(|(&u, &w)| w * hermite_eval(m1, u) * hermite_eval(m2, u))
        .sum();
    let expected = if m1 == m2 { factorial(m1.0) } else { 0.0 };
    Ok((integral - expected).abs())
}

/// Deterministic weight `g(s)` multiplying the Hermite transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightFunction {
    Constant { c: f64 },
    /// `∏ |s_i|^l_i`.
    #[serde(rename = "monomial")]
    MonomialProduct { exponents: Vec<f64> },
    /// `∏ |s_i| ln(q_i + |s_i|)`.
    #[serde(rename = "logproduct")]
    LogProduct { offsets: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthBound {
    /// The tight exponent stored with the weight.
    Tight,
    /// The looser exponent from the published bookkeeping.
    Published,
}

impl WeightFunction {
    pub fn constant(c: f64) -> Result<Self> {
        let g = WeightFunction::Constant { c };
        g.validate()?;
        Ok(g)
    }

    pub fn monomial(exponents: Vec<f64>) -> Result<Self> {
        let g = WeightFunction::MonomialProduct { exponents };
        g.validate()?;
        Ok(g)
    }

    pub fn log_product(offsets: Vec<f64>) -> Result<Self> {
        let g = WeightFunction::LogProduct { offsets };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            WeightFunction::Constant { c } => {
                if !(*c > 0.0 && c.is_finite()) {
                    return Err(Error::domain("weight.c", "constant must be positive"));
                }
            }
            WeightFunction::MonomialProduct { exponents } => {
                if exponents.is_empty() || exponents.iter().any(|l| !(*l > 0.0 && l.is_finite()))
                {
                    return Err(Error::domain("weight.l", "exponents must be positive"));
                }
            }
            WeightFunction::LogProduct { offsets } => {
                if offsets.is_empty() || offsets.iter().any(|q| !(*q > 1.0 && q.is_finite())) {
                    return Err(Error::domain("weight.q", "offsets must exceed 1"));
                }
            }
        }
        Ok(())
    }

    /// Dimension the weight is defined on; `None` for constants.
    pub fn dimension(&self) -> Option<usize> {
        match self {
            WeightFunction::Constant { .. } => None,
            WeightFunction::MonomialProduct { exponents } => Some(exponents.len()),
            WeightFunction::LogProduct { offsets } => Some(offsets.len()),
        }
    }

    /// Exponent `γ0` with `|g(s)| <= C (1 + |s|^γ0)`.
    pub fn growth_exponent(&self) -> f64 {
        match self {
            WeightFunction::Constant { .. } => 0.0,
            WeightFunction::MonomialProduct { exponents } => exponents.iter().sum(),
            WeightFunction::LogProduct { offsets } => offsets.len() as f64 + LOG_PRODUCT_SLACK,
        }
    }

    /// Growth exponent following the published estimates: `2 Σ l_i` for monomials
    /// and `2d` for log products (via `ln x <= x - 1`).
    pub fn published_exponent(&self) -> f64 {
        match self {
            WeightFunction::Constant { .. } => 0.0,
            WeightFunction::MonomialProduct { exponents } => 2.0 * exponents.iter().sum::<f64>(),
            WeightFunction::LogProduct { offsets } => 2.0 * offsets.len() as f64,
        }
    }

    pub fn exponent(&self, bound: GrowthBound) -> f64 {
        match bound {
            GrowthBound::Tight => self.growth_exponent(),
            GrowthBound::Published => self.published_exponent(),
        }
    }

    pub fn eval(&self, s: &[f64]) -> Result<f64> {
        if let Some(d) = self.dimension() {
            if d != s.len() {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: s.len(),
                });
            }
        }
        Ok(self.value(s))
    }

    /// Unchecked evaluation; the caller guarantees matching dimension.
    #[inline]
    pub(crate) fn value(&self, s: &[f64]) -> f64 {
        match self {
            WeightFunction::Constant { c } => *c,
            WeightFunction::MonomialProduct { exponents } => exponents
                .iter()
                .zip(s)
                .map(|(l, x)| x.abs().powf(*l))
                .product(),
            WeightFunction::LogProduct { offsets } => offsets
                .iter()
                .zip(s)
                .map(|(q, x)| x.abs() * (q + x.abs()).ln())
                .product(),
        }
    }
}

pub fn eval_weight(g: &WeightFunction, s: &[f64]) -> Result<f64> {
    g.eval(s)
}

/// Max of `|g(s)| / (1 + |s|^γ0)` over `probe_count` uniform probes in
/// `[-radius, radius]^d`. `d` is only consulted for constant weights.
pub fn weight_growth_check(
    g: &WeightFunction,
    d: usize,
    probe_count: usize,
    radius: f64,
    bound: GrowthBound,
    seed: u64,
) -> Result<f64> {
    if probe_count == 0 {
        return Err(Error::domain("probe_count", "must be positive"));
    }
    if !(radius > 0.0) {
        return Err(Error::domain("radius", "must be positive"));
    }
    let d = g.dimension().unwrap_or(d);
    let gamma0 = g.exponent(bound);
    let mut stream = GaussianStream::new(seed);
    let mut s = vec![0.0; d];
    let mut worst = 0.0f64;
    for _ in 0..probe_count {
        for x in s.iter_mut() {
            *x = radius * (2.0 * stream.uniform() - 1.0);
        }
        let ratio = g.value(&s).abs() / (1.0 + norm(&s).powf(gamma0));
        worst = worst.max(ratio);
    }
    Ok(worst)
}
