use serde::Serialize;

use super::FieldRealization;
use crate::covariance::CovarianceModel;
use crate::error::{Error, Result};

/// Empirical covariance at one lag, pooled over node pairs and averaged over
/// realizations.
#[derive(Debug, Clone, Serialize)]
pub struct LagEstimate {
    /// Lag in node units, one entry per axis.
    pub lag: Vec<isize>,
    pub distance: f64,
    pub estimate: f64,
    /// Standard error across realizations.
    pub std_error: f64,
    pub model_value: f64,
}

/// A paired difference of lag covariances, with its standard error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DefectEstimate {
    pub defect: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CovAudit {
    pub lags: Vec<LagEstimate>,
    /// `max |estimate - B_Z(|lag|)|`.
    pub max_deviation: f64,
    /// Largest difference between equal-length lags in different directions.
    pub isotropy: Option<DefectEstimate>,
    /// Largest difference of a lag covariance measured on the two halves of the grid.
    pub homogeneity: Option<DefectEstimate>,
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Mean of `Z_p Z_{p+lag}` over nodes `p` whose first axis index falls in `rows`.
fn lag_product(f: &FieldRealization, lag: &[isize], rows: std::ops::Range<usize>) -> Option<f64> {
    let grid = f.grid();
    let n = grid.nodes_per_axis() as isize;
    let (li, lj) = (lag[0], if grid.dim() == 2 { lag[1] } else { 0 });
    let cols = if grid.dim() == 2 { 0..n } else { 0..1 };
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in rows.start as isize..rows.end as isize {
        let i2 = i + li;
        if i2 < 0 || i2 >= n {
            continue;
        }
        for j in cols.clone() {
            let j2 = j + lj;
            if grid.dim() == 2 && (j2 < 0 || j2 >= n) {
                continue;
            }
            sum += f.at(i as usize, j as usize) * f.at(i2 as usize, j2.max(0) as usize);
            count += 1;
        }
    }
    (count > 0).then(|| sum / count as f64)
}

fn per_realization(
    fields: &[FieldRealization],
    lag: &[isize],
    rows: std::ops::Range<usize>,
) -> Result<Vec<f64>> {
    fields
        .iter()
        .map(|f| {
            lag_product(f, lag, rows.clone())
                .ok_or_else(|| Error::Input(format!("lag {lag:?} has no node pairs")))
        })
        .collect()
}

fn paired(a: &[f64], b: &[f64]) -> DefectEstimate {
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let (defect, std_error) = mean_se(&diffs);
    DefectEstimate { defect, std_error }
}

fn worst(defects: impl Iterator<Item = DefectEstimate>) -> Option<DefectEstimate> {
    defects.fold(None, |acc: Option<DefectEstimate>, d| match acc {
        Some(a) if a.defect.abs() >= d.defect.abs() => Some(a),
        _ => Some(d),
    })
}

/// Compares sample covariances of zero-mean realizations against the model and
/// probes isotropy and homogeneity. Lags are given in node units.
pub fn empirical_cov_audit(
    realizations: &[FieldRealization],
    model: &CovarianceModel,
    lags: &[Vec<isize>],
) -> Result<CovAudit> {
    if realizations.len() < 2 {
        return Err(Error::Input("audit needs at least two realizations".into()));
    }
    let grid = *realizations[0].grid();
    if realizations.iter().any(|f| *f.grid() != grid) {
        return Err(Error::Input("realizations are on different grids".into()));
    }
    let d = grid.dim();
    if lags.iter().any(|l| l.len() != d) {
        return Err(Error::Input(format!("lags must have {d} components")));
    }
    let n = grid.nodes_per_axis();
    let h = grid.step();

    let mut estimates = Vec::with_capacity(lags.len());
    let mut samples = Vec::with_capacity(lags.len());
    for lag in lags {
        let xs = per_realization(realizations, lag, 0..n)?;
        let (estimate, std_error) = mean_se(&xs);
        let distance = lag.iter().map(|&l| (l as f64 * h).powi(2)).sum::<f64>().sqrt();
        estimates.push(LagEstimate {
            lag: lag.clone(),
            distance,
            estimate,
            std_error,
            model_value: model.value(distance),
        });
        samples.push(xs);
    }
    let max_deviation = estimates
        .iter()
        .map(|e| (e.estimate - e.model_value).abs())
        .fold(0.0, f64::max);

    let mut iso = Vec::new();
    for a in 0..lags.len() {
        for b in a + 1..lags.len() {
            let len2 = |l: &Vec<isize>| l.iter().map(|x| x * x).sum::<isize>();
            let same_direction = lags[a].iter().zip(&lags[b]).all(|(x, y)| x.abs() == y.abs());
            if len2(&lags[a]) == len2(&lags[b]) && !same_direction {
                iso.push(paired(&samples[a], &samples[b]));
            }
        }
    }

    let half = n / 2;
    let mut homo = Vec::new();
    for lag in lags {
        let left = per_realization(realizations, lag, 0..half);
        let right = per_realization(realizations, lag, half..n);
        if let (Ok(l), Ok(r)) = (left, right) {
            homo.push(paired(&l, &r));
        }
    }

    Ok(CovAudit {
        lags: estimates,
        max_deviation,
        isotropy: worst(iso.into_iter()),
        homogeneity: worst(homo.into_iter()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{GeneratorTag, Grid};

    #[test]
    fn needs_two_realizations_on_one_grid() {
        let m = CovarianceModel::cauchy(0.4).unwrap();
        let g1 = Grid::new(1, 1.0, 2).unwrap();
        let g2 = Grid::new(1, 0.5, 2).unwrap();
        let a = FieldRealization::new(g1, vec![1.0; 5], 0, GeneratorTag::Cholesky).unwrap();
        let b = FieldRealization::new(g2, vec![1.0; 5], 0, GeneratorTag::Cholesky).unwrap();
        assert!(empirical_cov_audit(&[a.clone()], &m, &[vec![0]]).is_err());
        assert!(empirical_cov_audit(&[a, b], &m, &[vec![0]]).is_err());
    }

    #[test]
    fn constant_fields_give_unit_products() {
        let m = CovarianceModel::cauchy(0.4).unwrap();
        let g = Grid::new(2, 1.0, 3).unwrap();
        let f = FieldRealization::new(g, vec![1.0; 49], 0, GeneratorTag::Cholesky).unwrap();
        let audit =
            empirical_cov_audit(&[f.clone(), f], &m, &[vec![0, 0], vec![1, 0], vec![0, 1]]).unwrap();
        for l in &audit.lags {
            assert_eq!(l.estimate, 1.0);
        }
        assert_eq!(audit.isotropy.unwrap().defect, 0.0);
        assert_eq!(audit.homogeneity.unwrap().defect, 0.0);
    }
}
