//! Cross-checks between the exact and FFT generators and against the model.

use field_slln::covariance::CovarianceModel;
use field_slln::field::{
    empirical_cov_audit, CholeskyGenerator, CirculantGenerator, EmbeddingPolicy, FieldRealization,
    Grid,
};
use field_slln::rng::{mix, normal_cdf};

fn cauchy() -> CovarianceModel {
    CovarianceModel::cauchy(0.4).unwrap()
}

fn axis_lags() -> Vec<Vec<isize>> {
    vec![vec![0, 0], vec![1, 0], vec![2, 0], vec![5, 0]]
}

fn circulant_fields(grid: Grid, count: u64, seed: u64) -> Vec<FieldRealization> {
    let gen = CirculantGenerator::new(&cauchy(), grid, EmbeddingPolicy::default()).unwrap();
    (0..count).map(|r| gen.sample(mix(seed, r))).collect()
}

#[test]
fn cholesky_and_circulant_agree_on_lag_covariances() {
    let grid = Grid::new(2, 0.5, 16).unwrap();
    let chol = CholeskyGenerator::new(&cauchy(), grid).unwrap();
    let a: Vec<_> = (0..500).map(|r| chol.sample(mix(1, r))).collect();
    let b = circulant_fields(grid, 500, 2);
    let lags = axis_lags();
    let ea = empirical_cov_audit(&a, &cauchy(), &lags).unwrap();
    let eb = empirical_cov_audit(&b, &cauchy(), &lags).unwrap();
    for (x, y) in ea.lags.iter().zip(&eb.lags) {
        let se = (x.std_error.powi(2) + y.std_error.powi(2)).sqrt();
        assert!((x.estimate - y.estimate).abs() < 3.0 * se, "{x:?} vs {y:?}");
    }
    for e in [&ea.lags[0], &eb.lags[0]] {
        assert!((e.estimate - 1.0).abs() < 3.0 * e.std_error, "{e:?}");
    }
}

#[test]
fn circulant_matches_model_covariance() {
    let grid = Grid::new(2, 0.5, 20).unwrap();
    let fields = circulant_fields(grid, 400, 3);
    let audit = empirical_cov_audit(&fields, &cauchy(), &axis_lags()).unwrap();
    for l in &audit.lags {
        assert!((l.estimate - l.model_value).abs() < 3.5 * l.std_error, "{l:?}");
    }
}

#[test]
fn circulant_is_isotropic_and_homogeneous() {
    let grid = Grid::new(2, 0.5, 20).unwrap();
    let fields = circulant_fields(grid, 400, 4);
    let lags = vec![vec![0, 0], vec![2, 0], vec![0, 2], vec![3, 0], vec![0, 3]];
    let audit = empirical_cov_audit(&fields, &cauchy(), &lags).unwrap();
    let iso = audit.isotropy.unwrap();
    assert!(iso.defect.abs() < 3.0 * iso.std_error, "{iso:?}");
    let hom = audit.homogeneity.unwrap();
    assert!(hom.defect.abs() < 3.0 * hom.std_error, "{hom:?}");
}

#[test]
fn marginals_are_standard_normal() {
    let grid = Grid::new(2, 0.5, 12).unwrap();
    let centre = grid.node_count() / 2;
    let mut xs: Vec<f64> = circulant_fields(grid, 3000, 5)
        .iter()
        .map(|f| f.values()[centre])
        .collect();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    // 1% critical value of the Kolmogorov-Smirnov statistic
    assert!(d < 1.628 / n.sqrt(), "KS statistic {d}");
}

#[test]
fn same_seed_same_field() {
    let grid = Grid::new(2, 0.5, 8).unwrap();
    let a = circulant_fields(grid, 3, 9);
    let b = circulant_fields(grid, 3, 9);
    assert_eq!(a, b);
    let chol = CholeskyGenerator::new(&cauchy(), grid).unwrap();
    assert_eq!(chol.sample(4), chol.sample(4));
}
