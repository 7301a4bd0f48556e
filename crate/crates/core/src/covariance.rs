//! Covariance models of the base Gaussian field, the covariance of its Hermite
//! transform, and the growth/decay envelope that drives the strong-law conditions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{factorial, WeightFunction};

/// Slowly varying factor `L` of a power-law covariance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SlowlyVarying {
    Constant { c: f64 },
    /// `L(t) = ln(q + t)^p`, `q > 1`.
    LogPower { p: f64, q: f64 },
}

impl SlowlyVarying {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SlowlyVarying::Constant { c } => {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::domain("cov.L.c", "constant must be positive"));
                }
            }
            SlowlyVarying::LogPower { p, q } => {
                if !p.is_finite() {
                    return Err(Error::domain("cov.L.p", "exponent must be finite"));
                }
                if !(q > 1.0 && q.is_finite()) {
                    return Err(Error::domain("cov.L.q", "offset must exceed 1"));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            SlowlyVarying::Constant { c } => c,
            SlowlyVarying::LogPower { p, q } => (q + t).ln().powf(p),
        }
    }
}

/// Isotropic covariance `B_Z(r)` of a unit-variance Gaussian field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CovarianceModel {
    /// `B(r) = (1 + r^2)^(-beta)`.
    Cauchy { beta: f64 },
    /// `B(r) ∝ L(r) / r^beta` for `r >= r_min`, held constant below `r_min` and
    /// normalized so that `B(0) = 1`.
    PowerLaw {
        beta: f64,
        slowly_varying: SlowlyVarying,
        r_min: f64,
    },
}

impl CovarianceModel {
    pub fn cauchy(beta: f64) -> Result<Self> {
        let m = CovarianceModel::Cauchy { beta };
        m.validate()?;
        Ok(m)
    }

    pub fn power_law(beta: f64, slowly_varying: SlowlyVarying, r_min: f64) -> Result<Self> {
        let m = CovarianceModel::PowerLaw {
            beta,
            slowly_varying,
            r_min,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CovarianceModel::Cauchy { beta } => {
                if !(beta > 0.0 && beta.is_finite()) {
                    return Err(Error::domain("cov.beta", "exponent must be positive"));
                }
            }
            CovarianceModel::PowerLaw {
                beta,
                slowly_varying,
                r_min,
            } => {
                if !(beta > 0.0 && beta.is_finite()) {
                    return Err(Error::domain("cov.beta", "exponent must be positive"));
                }
                if !(r_min > 0.0 && r_min.is_finite()) {
                    return Err(Error::domain("cov.rmin", "cap radius must be positive"));
                }
                slowly_varying.validate()?;
                // d/dr log(L(r) r^-beta) <= 0 on [r_min, inf) is guaranteed by
                // p <= beta ln(q + r_min); reject anything that could turn upward.
                if let SlowlyVarying::LogPower { p, q } = slowly_varying {
                    if p > beta * (q + r_min).ln() {
                        return Err(Error::domain(
                            "cov.L.p",
                            "log exponent too large: covariance would increase past r_min",
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Covariance at lag `r`; assumes `r >= 0`.
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            CovarianceModel::Cauchy { beta } => (1.0 + r * r).powf(-beta),
            CovarianceModel::PowerLaw {
                beta,
                slowly_varying,
                r_min,
            } => {
                if r <= r_min {
                    1.0
                } else {
                    let cap = slowly_varying.eval(r_min) * r_min.powf(-beta);
                    slowly_varying.eval(r) * r.powf(-beta) / cap
                }
            }
        }
    }

    /// Hyperbolic decay exponent `e` with `B(r) ~ r^-e`.
    pub fn decay_exponent(&self) -> f64 {
        match *self {
            CovarianceModel::Cauchy { beta } => 2.0 * beta,
            CovarianceModel::PowerLaw { beta, .. } => beta,
        }
    }
}

/// `B_Z(r)`; rejects negative lags.
pub fn eval_cov(model: &CovarianceModel, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::domain("r", format!("lag must be nonnegative, got {r}")));
    }
    Ok(model.value(r))
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Covariance of `X(s) = g(s) H_k(Z(s))`: `g(s1) g(s2) k! B_Z(|s1 - s2|)^k`.
pub fn transformed_cov(
    g: &WeightFunction,
    k: u32,
    model: &CovarianceModel,
    s1: &[f64],
    s2: &[f64],
) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain("hermite.k", "order 0 gives a constant field"));
    }
    if s1.len() != s2.len() {
        return Err(Error::DimensionMismatch {
            expected: s1.len(),
            got: s2.len(),
        });
    }
    let g1 = g.eval(s1)?;
    let g2 = g.eval(s2)?;
    let b = model.value(distance(s1, s2));
    Ok(g1 * g2 * factorial(k) * b.powi(k as i32))
}

/// Constants `C`, `gamma`, `beta`, `d` of the covariance envelope
/// `C (1 + |s1|^gamma + |s2|^gamma) rho(|s1 - s2|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeParams {
    pub c: f64,
    pub gamma: f64,
    pub beta: f64,
    pub d: usize,
}

impl EnvelopeParams {
    pub fn new(c: f64, gamma: f64, beta: f64, d: usize) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::domain("C", "envelope constant must be positive"));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::domain("gamma", "growth exponent must be nonnegative"));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::domain("beta", "decay exponent must be positive"));
        }
        if d == 0 {
            return Err(Error::domain("d", "dimension must be at least 1"));
        }
        Ok(Self { c, gamma, beta, d })
    }

    /// `rho(u) = min(1, u^-beta)`.
    pub fn rho(&self, u: f64) -> f64 {
        if u < 1.0 {
            1.0
        } else {
            u.powf(-self.beta)
        }
    }

    /// Envelope with unit constant.
    fn shape(&self, s1: &[f64], s2: &[f64]) -> f64 {
        (1.0 + norm(s1).powf(self.gamma) + norm(s2).powf(self.gamma)) * self.rho(distance(s1, s2))
    }
}

pub fn assumption1_envelope(params: &EnvelopeParams, s1: &[f64], s2: &[f64]) -> f64 {
    params.c * params.shape(s1, s2)
}

/// Smallest envelope constant dominating `|transformed_cov|` over the given pairs,
/// i.e. the max of `|B(s1, s2)| / envelope_shape(s1, s2)`.
pub fn fit_envelope_constant(
    g: &WeightFunction,
    k: u32,
    model: &CovarianceModel,
    gamma: f64,
    beta: f64,
    pairs: &[(Vec<f64>, Vec<f64>)],
) -> Result<f64> {
    let d = pairs.first().map(|p| p.0.len()).unwrap_or(1);
    let shape = EnvelopeParams::new(1.0, gamma, beta, d)?;
    let mut best = 0.0f64;
    for (s1, s2) in pairs {
        let b = transformed_cov(g, k, model, s1, s2)?.abs();
        best = best.max(b / shape.shape(s1, s2));
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DependenceClass {
    Weak,
    PossiblyLongRange,
}

/// Weak dependence iff the envelope decays fast enough to be integrable:
/// `beta - gamma >= d`.
pub fn dependence_class(beta: f64, gamma: f64, d: usize) -> Result<DependenceClass> {
    if !(beta > 0.0) {
        return Err(Error::domain("beta", "must be positive"));
    }
    if !(gamma >= 0.0) {
        return Err(Error::domain("gamma", "must be nonnegative"));
    }
    if d == 0 {
        return Err(Error::domain("d", "must be at least 1"));
    }
    Ok(if beta - gamma >= d as f64 {
        DependenceClass::Weak
    } else {
        DependenceClass::PossiblyLongRange
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RangeClass {
    LongRange,
    ShortRange,
}

/// Long-range iff `∫ r^(d-1) B_Z(r)^k dr` diverges, i.e. `k e <= d`. The boundary
/// `k e = d` is classified long-range regardless of the slowly varying factor.
pub fn long_range_indicator(model: &CovarianceModel, k: u32, d: usize) -> Result<RangeClass> {
    model.validate()?;
    if k == 0 {
        return Err(Error::domain("hermite.k", "must be at least 1"));
    }
    if d == 0 {
        return Err(Error::domain("d", "must be at least 1"));
    }
    let e = model.decay_exponent();
    if !(e.is_finite() && e > 0.0) {
        return Err(Error::Unsupported("model has no hyperbolic decay exponent".into()));
    }
    Ok(if k as f64 * e <= d as f64 {
        RangeClass::LongRange
    } else {
        RangeClass::ShortRange
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::GaussianStream;

    fn cauchy04() -> CovarianceModel {
        CovarianceModel::cauchy(0.4).unwrap()
    }

    #[test]
    fn cauchy_values() {
        let m = cauchy04();
        assert_eq!(eval_cov(&m, 0.0).unwrap(), 1.0);
        assert!((eval_cov(&m, 1.0).unwrap() - 0.757_858_283_255_199).abs() < 1e-12);
        assert!(eval_cov(&m, -0.5).is_err());
    }

    #[test]
    fn cauchy_tail_matches_power() {
        let m = cauchy04();
        let r: f64 = 1e6;
        let ratio = m.value(r) * r.powf(0.8);
        assert!((ratio - 1.0).abs() < 1e-6);
    }

    #[test]
    fn models_are_bounded_and_non_increasing() {
        let models = [
            cauchy04(),
            CovarianceModel::cauchy(2.0).unwrap(),
            CovarianceModel::power_law(0.8, SlowlyVarying::Constant { c: 3.0 }, 1.0).unwrap(),
            CovarianceModel::power_law(0.5, SlowlyVarying::LogPower { p: 0.4, q: 2.0 }, 1.0)
                .unwrap(),
            CovarianceModel::power_law(1.2, SlowlyVarying::LogPower { p: -1.0, q: 3.0 }, 0.5)
                .unwrap(),
        ];
        for m in &models {
            assert_eq!(m.value(0.0), 1.0);
            let mut prev = 1.0;
            for i in 0..20_000 {
                let r = i as f64 * 0.01 + (i as f64 * 0.001).powi(3);
                let v = m.value(r);
                assert!((0.0..=1.0).contains(&v), "{m:?} r={r} v={v}");
                assert!(v <= prev + 1e-15, "{m:?} increases at r={r}");
                prev = v;
            }
        }
    }

    #[test]
    fn power_law_rejects_upturn() {
        let bad = CovarianceModel::power_law(0.1, SlowlyVarying::LogPower { p: 5.0, q: 2.0 }, 1.0);
        assert!(bad.is_err());
    }

    #[test]
    fn log_power_is_slowly_varying() {
        let l = SlowlyVarying::LogPower { p: 1.5, q: 2.0 };
        for lambda in [0.5, 2.0, 10.0] {
            let dev = |t: f64| (l.eval(lambda * t) / l.eval(t) - 1.0).abs();
            assert!(dev(1e3) > dev(1e6) && dev(1e6) > dev(1e12), "lambda={lambda}");
            assert!(dev(1e100) < 0.02, "lambda={lambda}");
        }
        let mild = SlowlyVarying::LogPower { p: 0.05, q: 2.0 };
        for lambda in [0.5, 2.0, 10.0] {
            let t = 1e6;
            assert!((mild.eval(lambda * t) / mild.eval(t) - 1.0).abs() < 0.01, "lambda={lambda}");
        }
    }

    #[test]
    fn transformed_cov_examples() {
        let one = WeightFunction::Constant { c: 1.0 };
        let m = cauchy04();
        let v = transformed_cov(&one, 2, &m, &[0.3, -1.0], &[0.3, -1.0]).unwrap();
        assert_eq!(v, 2.0);
        let v = transformed_cov(&one, 1, &m, &[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!((v - 0.757_858_283_255_199).abs() < 1e-12);
        let g = WeightFunction::monomial(vec![0.1, 0.1]).unwrap();
        let v = transformed_cov(&g, 2, &m, &[1.0, 1.0], &[1.0, 2.0]).unwrap();
        assert!((v - 2f64.powf(0.3)).abs() < 1e-12);
        assert!((v - 1.231_144_413).abs() < 1e-8);
        assert!(transformed_cov(&one, 0, &m, &[0.0], &[0.0]).is_err());
    }

    #[test]
    fn transformed_cov_is_symmetric() {
        let g = WeightFunction::monomial(vec![0.1, 0.3]).unwrap();
        let m = cauchy04();
        let mut s = GaussianStream::new(11);
        for _ in 0..1000 {
            let a = [s.normal() * 50.0, s.normal() * 50.0];
            let b = [s.normal() * 50.0, s.normal() * 50.0];
            let x = transformed_cov(&g, 3, &m, &a, &b).unwrap();
            let y = transformed_cov(&g, 3, &m, &b, &a).unwrap();
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn envelope_examples() {
        let p = EnvelopeParams::new(1.0, 0.0, 1.0, 2).unwrap();
        assert_eq!(assumption1_envelope(&p, &[0.0, 0.0], &[0.0, 0.0]), 3.0);
        let p = EnvelopeParams::new(1.0, 0.4, 1.6, 2).unwrap();
        let v = assumption1_envelope(&p, &[1.0, 0.0], &[-1.0, 0.0]);
        assert!((v - 3.0 * 2f64.powf(-1.6)).abs() < 1e-14);
        assert!((v - 0.989_630).abs() < 1e-5);
        assert!(EnvelopeParams::new(0.0, 0.4, 1.6, 2).is_err());
    }

    #[test]
    fn dependence_classes() {
        assert_eq!(dependence_class(3.0, 0.5, 2).unwrap(), DependenceClass::Weak);
        assert_eq!(
            dependence_class(1.6, 0.4, 2).unwrap(),
            DependenceClass::PossiblyLongRange
        );
        for d in 1..5 {
            assert_eq!(
                dependence_class(d as f64, 0.0, d).unwrap(),
                DependenceClass::Weak
            );
        }
        assert!(dependence_class(0.0, 0.1, 2).is_err());
        assert!(dependence_class(1.0, 0.1, 0).is_err());
    }

    #[test]
    fn range_indicator() {
        let lr = long_range_indicator(&cauchy04(), 2, 2).unwrap();
        assert_eq!(lr, RangeClass::LongRange);
        let sr = long_range_indicator(&CovarianceModel::cauchy(2.0).unwrap(), 1, 2).unwrap();
        assert_eq!(sr, RangeClass::ShortRange);
        let b = long_range_indicator(&CovarianceModel::cauchy(1.0).unwrap(), 1, 2).unwrap();
        assert_eq!(b, RangeClass::LongRange);
    }
}
