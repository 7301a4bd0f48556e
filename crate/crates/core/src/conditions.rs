//! Parameter-regime checks for the strong law of `ξ(μ)` along `μ_n = n^α`.
//!
//! With envelope exponents `β` (decay), `γ` (growth) and dimension `d`, the
//! variance series converges when `α (min(β, d) - γ) > 1` and the oscillation
//! series converge when `α γ < 1`; a valid `α` exists iff `2γ < min(β, d)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeParams {
    pub beta: f64,
    pub gamma: f64,
    pub d: usize,
}

impl RegimeParams {
    pub fn new(beta: f64, gamma: f64, d: usize) -> Result<Self> {
        let p = Self { beta, gamma, d };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::domain("beta", "must be positive and finite"));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::domain("gamma", "must be nonnegative and finite"));
        }
        if self.d == 0 {
            return Err(Error::domain("d", "must be at least 1"));
        }
        Ok(())
    }

    /// `min(β, d) - γ`: the exponent of the variance series in `μ_n`.
    fn variance_exponent(&self) -> f64 {
        self.beta.min(self.d as f64) - self.gamma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeOutcome {
    /// `0 < β < d` and `2γ < β`.
    HoldsCaseI,
    /// `β >= d` and `2γ < d`.
    HoldsCaseII,
    NotCovered,
}

/// Open interval `(lower, upper)`; `upper = +inf` when `γ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpenInterval {
    pub lower: f64,
    pub upper: f64,
}

impl OpenInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower < x && x < self.upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeVerdict {
    pub outcome: RegimeOutcome,
    pub alpha_interval: Option<OpenInterval>,
}

pub fn theorem2_regime(p: &RegimeParams) -> Result<RegimeVerdict> {
    p.validate()?;
    let d = p.d as f64;
    let outcome = if p.beta < d && 2.0 * p.gamma < p.beta {
        RegimeOutcome::HoldsCaseI
    } else if p.beta >= d && 2.0 * p.gamma < d {
        RegimeOutcome::HoldsCaseII
    } else {
        RegimeOutcome::NotCovered
    };
    let alpha_interval = (outcome != RegimeOutcome::NotCovered).then(|| OpenInterval {
        lower: 1.0 / p.variance_exponent(),
        upper: if p.gamma > 0.0 {
            1.0 / p.gamma
        } else {
            f64::INFINITY
        },
    });
    Ok(RegimeVerdict {
        outcome,
        alpha_interval: alpha_interval.filter(|i| i.lower < i.upper),
    })
}

/// Variance series `Σ μ_n^-(min(β,d) - γ)` for `μ_n = n^α` (p-series test; the
/// boundary exponent 1 diverges).
pub fn lemma1_series_converges(alpha: f64, p: &RegimeParams) -> bool {
    alpha * p.variance_exponent() > 1.0
}

/// Oscillation series for `μ_n = n^α`: both tails behave like `n^-(2 - αγ)`.
pub fn lemma2_series_converge(alpha: f64, p: &RegimeParams) -> bool {
    alpha * p.gamma < 1.0
}

/// `(C / μ^{2d}) (μ^d + μ^{d+γ}) (C + μ^{d-β})`.
pub fn variance_upper_bound(mu: f64, p: &RegimeParams, c: f64) -> f64 {
    let d = p.d as f64;
    c / mu.powf(2.0 * d) * (mu.powf(d) + mu.powf(d + p.gamma)) * (c + mu.powf(d - p.beta))
}

/// Terms of the variance series for a general sequence: `μ_n^-(min(β,d) - γ)`.
pub fn lemma1_term(mu_n: f64, p: &RegimeParams) -> f64 {
    mu_n.powf(-p.variance_exponent())
}

/// Terms of the two oscillation series for consecutive `μ_n`, `μ_{n+1}`.
pub fn lemma2_terms(mu_n: f64, mu_next: f64, p: &RegimeParams) -> (f64, f64) {
    let d = p.d as f64;
    let a = (mu_next.powf(d) - mu_n.powf(d)).powi(2) * mu_n.powf(p.gamma) / mu_n.powf(2.0 * d);
    let b = (mu_next.powf(-d) - mu_n.powf(-d)).powi(2) * mu_next.powf(2.0 * d + p.gamma);
    (a, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesProbe {
    pub partial_sum: f64,
    /// Least-squares slope of `log a_n` against `log n` over the upper decade.
    pub tail_slope: f64,
    pub likely_divergent: bool,
}

/// Slopes within this distance of -1 count as -1.
const SLOPE_TOLERANCE: f64 = 1e-6;

/// Partial sum to `n_max` and the log-log tail slope of positive terms `a_n`.
pub fn numeric_series_probe(terms: impl Fn(u64) -> f64, n_max: u64) -> Result<SeriesProbe> {
    if n_max < 10 {
        return Err(Error::domain("n_max", "need at least 10 terms"));
    }
    let tail_start = (n_max / 10).max(1);
    let mut partial_sum = 0.0;
    let (mut sx, mut sy, mut sxx, mut sxy, mut count) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for n in 1..=n_max {
        let a = terms(n);
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::domain("terms", format!("term {n} is not positive: {a}")));
        }
        partial_sum += a;
        if n >= tail_start {
            let (x, y) = ((n as f64).ln(), a.ln());
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            count += 1.0;
        }
    }
    let tail_slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    Ok(SeriesProbe {
        partial_sum,
        tail_slope,
        likely_divergent: tail_slope >= -1.0 - SLOPE_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(beta: f64, gamma: f64, d: usize) -> RegimeParams {
        RegimeParams::new(beta, gamma, d).unwrap()
    }

    #[test]
    fn regime_examples() {
        let v = theorem2_regime(&p(1.6, 0.4, 2)).unwrap();
        assert_eq!(v.outcome, RegimeOutcome::HoldsCaseI);
        let i = v.alpha_interval.unwrap();
        assert!((i.lower - 1.0 / 1.2).abs() < 1e-15 && (i.upper - 2.5).abs() < 1e-15);

        let v = theorem2_regime(&p(3.0, 0.5, 2)).unwrap();
        assert_eq!(v.outcome, RegimeOutcome::HoldsCaseII);
        let i = v.alpha_interval.unwrap();
        assert!((i.lower - 2.0 / 3.0).abs() < 1e-15 && (i.upper - 2.0).abs() < 1e-15);

        let v = theorem2_regime(&p(1.0, 0.6, 2)).unwrap();
        assert_eq!(v.outcome, RegimeOutcome::NotCovered);
        assert!(v.alpha_interval.is_none());
    }

    #[test]
    fn gamma_zero_has_unbounded_interval() {
        let v = theorem2_regime(&p(0.8, 0.0, 2)).unwrap();
        assert_eq!(v.outcome, RegimeOutcome::HoldsCaseI);
        let i = v.alpha_interval.unwrap();
        assert_eq!(i.upper, f64::INFINITY);
        assert!((i.lower - 1.25).abs() < 1e-15);
    }

    #[test]
    fn lemma_examples() {
        let q = p(1.6, 0.4, 2);
        assert!(lemma1_series_converges(1.0, &q));
        assert!(!lemma1_series_converges(0.5, &q));
        // alpha exactly 1 / (beta - gamma)
        assert!(!lemma1_series_converges(2.0, &p(1.0, 0.5, 2)));
        assert!(!lemma1_series_converges(1.0, &p(1.5, 0.5, 2)));
        assert!(lemma2_series_converge(2.0, &q));
        assert!(!lemma2_series_converge(3.0, &q));
        assert!(lemma2_series_converge(1e9, &p(1.6, 0.0, 2)));
    }

    #[test]
    fn invalid_params() {
        assert!(RegimeParams::new(0.0, 0.1, 2).is_err());
        assert!(RegimeParams::new(1.0, -0.1, 2).is_err());
        assert!(RegimeParams::new(1.0, 0.1, 0).is_err());
        let bad = RegimeParams {
            beta: f64::NAN,
            gamma: 0.0,
            d: 1,
        };
        assert!(theorem2_regime(&bad).is_err());
    }

    #[test]
    fn variance_bound_values() {
        let v = variance_upper_bound(10.0, &p(1.6, 0.4, 2), 1.0);
        assert!((v - 0.123_333_463_078_210_9).abs() < 1e-14);
        for mu in [1.5, 10.0, 300.0] {
            let v = variance_upper_bound(mu, &p(2.0, 0.0, 2), 1.0);
            assert!((v - 4.0 / (mu * mu)).abs() < 1e-14 * v.max(1.0));
        }
        let q = p(1.6, 0.4, 2);
        let mut prev = f64::INFINITY;
        for i in 0..=290 {
            let v = variance_upper_bound(10.0 + i as f64, &q, 1.0);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn series_probes() {
        let conv = numeric_series_probe(|n| 1.0 / (n * n) as f64, 100_000).unwrap();
        assert!((conv.tail_slope + 2.0).abs() < 1e-9);
        assert!(!conv.likely_divergent);
        assert!((conv.partial_sum - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-4);

        let harm = numeric_series_probe(|n| 1.0 / n as f64, 100_000).unwrap();
        assert!((harm.tail_slope + 1.0).abs() < 1e-9);
        assert!(harm.likely_divergent);

        let q = p(1.6, 0.4, 2);
        let l1 = numeric_series_probe(|n| lemma1_term(n as f64, &q), 100_000).unwrap();
        assert!((l1.tail_slope + 1.2).abs() < 1e-9);
        assert_eq!(!l1.likely_divergent, lemma1_series_converges(1.0, &q));

        assert!(numeric_series_probe(|n| if n == 5 { 0.0 } else { 1.0 }, 100).is_err());
    }

    #[test]
    fn lemma2_terms_decay_like_predicted() {
        // alpha = 2, gamma = 0.4: exponent 2 - 0.8 = 1.2
        let q = p(1.6, 0.4, 2);
        let alpha = 2.0;
        let mu = |n: u64| (n as f64).powf(alpha);
        let a = numeric_series_probe(|n| lemma2_terms(mu(n), mu(n + 1), &q).0, 200_000).unwrap();
        let b = numeric_series_probe(|n| lemma2_terms(mu(n), mu(n + 1), &q).1, 200_000).unwrap();
        assert!((a.tail_slope + 1.2).abs() < 1e-3, "{a:?}");
        assert!((b.tail_slope + 1.2).abs() < 1e-3, "{b:?}");
        assert!(!a.likely_divergent && !b.likely_divergent);
    }
}
