//! Sample moments, quantiles, Q-Q data and the D'Agostino–Pearson omnibus test.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{normal_quantile, normal_cdf};

/// Probability levels reported in summaries.
pub const QUANTILE_LEVELS: [f64; 9] = [0.01, 0.05, 0.10, 0.25, 0.50, 0.75, 0.90, 0.95, 0.99];

/// Column labels matching [`QUANTILE_LEVELS`].
pub const QUANTILE_LABELS: [&str; 9] = ["q01", "q05", "q10", "q25", "q50", "q75", "q90", "q95", "q99"];

/// Chi-square(2) critical values.
pub const OMNIBUS_CRITICAL_5: f64 = 5.991_464_547_107_979;
pub const OMNIBUS_CRITICAL_1: f64 = 9.210_340_371_976_182;

pub const MIN_DISTRIBUTION_SAMPLES: usize = 30;

/// Population moments accumulated in index order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    /// Divides by `n`.
    pub variance: f64,
    pub mean_square: f64,
    /// `g1 = m3 / m2^{3/2}`; NaN for zero variance.
    pub skewness: f64,
    /// `g2 = m4 / m2^2 - 3`; NaN for zero variance.
    pub excess_kurtosis: f64,
}

pub fn moments(xs: &[f64]) -> Moments {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let mean_square = xs.iter().map(|x| x * x).sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for x in xs {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (f64::NAN, f64::NAN)
    };
    Moments {
        n: xs.len(),
        mean,
        variance: m2,
        mean_square,
        skewness,
        excess_kurtosis,
    }
}

/// Linear-interpolation quantile of sorted data (Hyndman–Fan type 7).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = p.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// D'Agostino's z statistic for skewness.
pub fn skewness_z(g1: f64, n: usize) -> f64 {
    let n = n as f64;
    let y = g1 * ((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0))).sqrt();
    let beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0)
        / ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
    let w2 = -1.0 + (2.0 * (beta2 - 1.0)).sqrt();
    let delta = 1.0 / (0.5 * w2.ln()).sqrt();
    let alpha = (2.0 / (w2 - 1.0)).sqrt();
    let y = if y == 0.0 { 1.0 } else { y };
    delta * (y / alpha + ((y / alpha).powi(2) + 1.0).sqrt()).ln()
}

/// Anscombe–Glynn z statistic for kurtosis.
pub fn kurtosis_z(g2: f64, n: usize) -> f64 {
    let n = n as f64;
    let b2 = g2 + 3.0;
    let e = 3.0 * (n - 1.0) / (n + 1.0);
    let varb2 = 24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0) * (n + 1.0) * (n + 3.0) * (n + 5.0));
    let x = (b2 - e) / varb2.sqrt();
    let sqrtbeta1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0))
        * (6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0))).sqrt();
    let a = 6.0 + 8.0 / sqrtbeta1 * (2.0 / sqrtbeta1 + (1.0 + 4.0 / (sqrtbeta1 * sqrtbeta1)).sqrt());
    let term1 = 1.0 - 2.0 / (9.0 * a);
    let denom = 1.0 + x * (2.0 / (a - 4.0)).sqrt();
    let term2 = denom.signum() * ((1.0 - 2.0 / a) / denom.abs()).cbrt();
    (term1 - term2) / (2.0 / (9.0 * a)).sqrt()
}

/// Standard errors of `g1` and `g2` under normality.
pub fn skewness_kurtosis_se(n: usize) -> (f64, f64) {
    let n = n as f64;
    let ses = (6.0 * n * (n - 1.0) / ((n - 2.0) * (n + 1.0) * (n + 3.0))).sqrt();
    let sek = 2.0 * ses * ((n * n - 1.0) / ((n - 3.0) * (n + 5.0))).sqrt();
    (ses, sek)
}

/// Plotting positions `(i - a) / (n + 1 - 2a)`, `a = 3/8` for `n <= 10`, else `1/2`.
pub fn plotting_positions(n: usize) -> Vec<f64> {
    let a = if n <= 10 { 0.375 } else { 0.5 };
    (1..=n)
        .map(|i| (i as f64 - a) / (n as f64 + 1.0 - 2.0 * a))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct QqPoint {
    pub theoretical_quantile: f64,
    pub sample_quantile: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistributionSummary {
    pub moments: Moments,
    pub skewness_se: f64,
    pub kurtosis_se: f64,
    pub skewness_z: f64,
    pub kurtosis_z: f64,
    /// `K² = z_skew² + z_kurt²`, chi-square(2) under normality.
    pub omnibus: f64,
    pub omnibus_p: f64,
    /// `(label, value)` at [`QUANTILE_LEVELS`].
    pub quantiles: Vec<(String, f64)>,
    /// Standardized sample against standard normal quantiles.
    pub qq: Vec<QqPoint>,
}

impl DistributionSummary {
    pub fn rejects_normality(&self, level: f64) -> bool {
        self.omnibus_p < level
    }

    /// Two-sided skewness test p-value.
    pub fn skewness_p(&self) -> f64 {
        2.0 * (1.0 - normal_cdf(self.skewness_z.abs()))
    }
}

pub fn distribution_summary(samples: &[f64]) -> Result<DistributionSummary> {
    if samples.len() < MIN_DISTRIBUTION_SAMPLES {
        return Err(Error::Input(format!(
            "distribution summary needs at least {MIN_DISTRIBUTION_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    let m = moments(samples);
    if !(m.variance > 0.0) {
        return Err(Error::DegenerateSample("zero variance".into()));
    }
    let n = samples.len();
    let (skewness_se, kurtosis_se) = skewness_kurtosis_se(n);
    let zs = skewness_z(m.skewness, n);
    let zk = kurtosis_z(m.excess_kurtosis, n);
    let omnibus = zs * zs + zk * zk;
    let sorted = sorted(samples);
    let quantiles = QUANTILE_LEVELS
        .iter()
        .zip(QUANTILE_LABELS)
        .map(|(&p, label)| (label.to_string(), quantile_sorted(&sorted, p)))
        .collect();
    let sd = m.variance.sqrt();
    let qq = plotting_positions(n)
        .into_iter()
        .zip(&sorted)
        .map(|(p, x)| QqPoint {
            theoretical_quantile: normal_quantile(p),
            sample_quantile: (x - m.mean) / sd,
        })
        .collect();
    Ok(DistributionSummary {
        moments: m,
        skewness_se,
        kurtosis_se,
        skewness_z: zs,
        kurtosis_z: zk,
        omnibus,
        omnibus_p: (-omnibus / 2.0).exp(),
        quantiles,
        qq,
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::GaussianStream;

    fn fixture() -> Vec<f64> {
        (0..40)
            .map(|i| {
                let i = i as f64;
                ((i * 0.37) % 1.7 + ((i * i) % 7.0) * 0.11 - 1.0).powi(3)
            })
            .collect()
    }

    #[test]
    fn matches_reference_implementation() {
        let x = fixture();
        let s = distribution_summary(&x).unwrap();
        assert!((s.moments.skewness - 0.260_100_930_501_061_6).abs() < 1e-9);
        assert!((s.moments.excess_kurtosis - 4.955_262_658_474_642).abs() < 1e-9);
        assert!((s.skewness_z - 0.755_993_515_802_960_1).abs() < 1e-9);
        assert!((s.kurtosis_z - 3.487_688_759_760_915_4).abs() < 1e-9);
        assert!((s.omnibus - 12.735_499_080_898_753).abs() < 1e-8);
        assert!((s.omnibus_p - 0.001_716_016_709_574_708_6).abs() < 1e-10);
        assert!((s.quantiles[0].1 + 0.913_688_32).abs() < 1e-9);
        assert!((s.quantiles[4].1 + 2.7e-5).abs() < 1e-9);
    }

    #[test]
    fn normal_sample_is_not_rejected() {
        let mut g = GaussianStream::new(2024);
        let xs: Vec<f64> = (0..10_000).map(|_| g.normal()).collect();
        let s = distribution_summary(&xs).unwrap();
        assert!(s.omnibus < OMNIBUS_CRITICAL_1, "K2 = {}", s.omnibus);
        assert!(s.qq.windows(2).all(|w| w[0].theoretical_quantile < w[1].theoretical_quantile));
    }

    #[test]
    fn chi_square_minus_one_is_right_skewed() {
        let mut g = GaussianStream::new(99);
        let xs: Vec<f64> = (0..1000)
            .map(|_| {
                let z = g.normal();
                z * z - 1.0
            })
            .collect();
        let s = distribution_summary(&xs).unwrap();
        assert!(s.skewness_z > 0.0 && s.skewness_p() < 0.01);
        assert!(s.rejects_normality(0.01));
    }

    #[test]
    fn degenerate_and_short_samples() {
        assert!(matches!(
            distribution_summary(&[1.5; 50]),
            Err(Error::DegenerateSample(_))
        ));
        assert!(distribution_summary(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn quantile_interpolation() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert_eq!(quantile_sorted(&v, 1.0), 4.0);
        assert_eq!(quantile_sorted(&v, 0.5), 2.5);
    }

    #[test]
    fn rmse_variance_identity() {
        let x = fixture();
        let m = moments(&x);
        let lhs = m.mean_square;
        let rhs = m.variance + m.mean * m.mean;
        assert!(((lhs - rhs) / lhs).abs() < 1e-12);
    }

    #[test]
    fn slope_of_power_law() {
        let x = [10.0, 50.0, 100.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-0.6)).collect();
        assert!((log_log_slope(&x, &y) + 0.6).abs() < 1e-12);
    }
}
