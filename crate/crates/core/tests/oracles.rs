//! Monte Carlo and closed-form oracles for covariances, Hermite identities and
//! the variance of the window functional.

use field_slln::covariance::{
    assumption1_envelope, eval_cov, fit_envelope_constant, transformed_cov, CovarianceModel,
    EnvelopeParams,
};
use field_slln::harness::{run_experiment, ExperimentConfig};
use field_slln::hermite::{eval_weight, hermite_eval, HermiteOrder, WeightFunction};
use field_slln::rng::GaussianStream;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mean_se(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut n, mut s, mut ss) = (0.0, 0.0, 0.0);
    for x in xs {
        n += 1.0;
        s += x;
        ss += x * x;
    }
    let mean = s / n;
    let var = (ss / n - mean * mean) * n / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn h(k: u32, u: f64) -> f64 {
    hermite_eval(HermiteOrder(k), u)
}

#[test]
fn transformed_cov_matches_brute_force_sampling() {
    let g = WeightFunction::monomial(vec![0.1, 0.1]).unwrap();
    let m = CovarianceModel::cauchy(0.4).unwrap();
    let (s1, s2) = ([1.0, 1.0], [1.0, 2.0]);
    let rho = eval_cov(&m, 1.0).unwrap();
    let (g1, g2) = (eval_weight(&g, &s1).unwrap(), eval_weight(&g, &s2).unwrap());
    for k in 1..=3 {
        let mut s = GaussianStream::new(100 + k as u64);
        let (mean, se) = mean_se((0..1_000_000).map(|_| {
            let (z1, z2) = s.correlated_pair(rho);
            g1 * h(k, z1) * g2 * h(k, z2)
        }));
        let exact = transformed_cov(&g, k, &m, &s1, &s2).unwrap();
        assert!((mean - exact).abs() < 3.0 * se, "k={k}: {mean} vs {exact} (se {se})");
    }
}

#[test]
fn hermite_means_vanish() {
    let mut s = GaussianStream::new(11);
    let z: Vec<f64> = (0..1_000_000).map(|_| s.normal()).collect();
    for k in 1..=3 {
        let (mean, se) = mean_se(z.iter().map(|&u| h(k, u)));
        assert!(mean.abs() < 4.0 * se, "k={k}: mean {mean} se {se}");
    }
}

#[test]
fn hermite_product_moments() {
    for k in 1..=2u32 {
        for (i, rho) in [0.0, 0.5, 0.9].into_iter().enumerate() {
            let mut s = GaussianStream::new(1000 + 10 * k as u64 + i as u64);
            let (mean, se) = mean_se((0..400_000).map(|_| {
                let (a, b) = s.correlated_pair(rho);
                h(k, a) * h(k, b)
            }));
            let exact = (1..=k).product::<u32>() as f64 * rho.powi(k as i32);
            assert!((mean - exact).abs() < 3.0 * se, "k={k} rho={rho}: {mean} vs {exact}");
        }
    }
}

fn probe_pairs(seed: u64, count: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(count);
    while pairs.len() < count {
        let s1: Vec<f64> = (0..2).map(|_| rng.random_range(-300.0..300.0)).collect();
        let s2: Vec<f64> = (0..2).map(|_| rng.random_range(-300.0..300.0)).collect();
        let dist = ((s1[0] - s2[0]).powi(2) + (s1[1] - s2[1]).powi(2)).sqrt();
        if dist >= 1.0 {
            pairs.push((s1, s2));
        }
    }
    pairs
}

fn worst_ratio(c: f64, pairs: &[(Vec<f64>, Vec<f64>)]) -> f64 {
    let g = WeightFunction::monomial(vec![0.1, 0.1]).unwrap();
    let m = CovarianceModel::cauchy(0.4).unwrap();
    let env = EnvelopeParams::new(c, 0.4, 1.6, 2).unwrap();
    pairs
        .iter()
        .map(|(s1, s2)| {
            transformed_cov(&g, 2, &m, s1, s2).unwrap().abs() / assumption1_envelope(&env, s1, s2)
        })
        .fold(0.0, f64::max)
}

#[test]
fn fitted_envelope_dominates_probe() {
    let g = WeightFunction::monomial(vec![0.1, 0.1]).unwrap();
    let m = CovarianceModel::cauchy(0.4).unwrap();
    let probe = probe_pairs(1, 10_000);
    let c = fit_envelope_constant(&g, 2, &m, 0.4, 1.6, &probe).unwrap();
    assert!(c.is_finite() && c > 0.0);
    assert!(worst_ratio(c, &probe) <= 1.0);
}

#[test]
fn fitted_envelope_constant_is_stable_across_probes() {
    let g = WeightFunction::monomial(vec![0.1, 0.1]).unwrap();
    let m = CovarianceModel::cauchy(0.4).unwrap();
    let c = fit_envelope_constant(&g, 2, &m, 0.4, 1.6, &probe_pairs(1, 10_000)).unwrap();
    // a sample maximum sits just below the supremum
    let worst = worst_ratio(c, &probe_pairs(2, 10_000));
    assert!(worst <= 1.001, "envelope exceeded by factor {worst}");
}

/// `Var ξ(μ) = (h/μ)^{2d} Σ_p Σ_q g(p) g(q) k! B(|p - q|)^k` over the window nodes.
fn exact_discrete_variance(h: f64, mu: f64, l: f64, beta_c: f64, k: i32) -> f64 {
    let n = (mu / h).round() as i64;
    let nodes: Vec<(f64, f64, f64)> = (-n..=n)
        .flat_map(|i| (-n..=n).map(move |j| (i as f64 * h, j as f64 * h)))
        .map(|(x, y)| (x, y, x.abs().powf(l) * y.abs().powf(l)))
        .collect();
    let kfact: f64 = (1..=k).map(f64::from).product();
    let mut total = 0.0;
    for &(x1, y1, g1) in &nodes {
        if g1 == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for &(x2, y2, g2) in &nodes {
            let r2 = (x1 - x2).powi(2) + (y1 - y2).powi(2);
            row += g2 * (1.0 + r2).powf(-beta_c * k as f64);
        }
        total += g1 * row;
    }
    kfact * total * (h / mu).powi(4)
}

#[test]
fn mean_square_matches_exact_discrete_variance() {
    let exact = exact_discrete_variance(0.5, 10.0, 0.1, 0.4, 2);
    assert!((exact.sqrt() - 1.676).abs() < 0.01, "exact rms {}", exact.sqrt());

    let config = ExperimentConfig {
        grid_n: 20,
        mus: vec![10.0],
        replicates: 400,
        ..ExperimentConfig::reduced(2024)
    };
    let result = run_experiment(&config).unwrap();
    let (ms, se) = mean_se(result.values_at(0).iter().map(|x| x * x));
    assert!((ms - exact).abs() < 4.0 * se, "mean square {ms} vs exact {exact} (se {se})");
}
