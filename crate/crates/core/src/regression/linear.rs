use serde::{Deserialize, Serialize};

use super::{check_training_data, ModelError, ModelKind, Regressor};
use crate::linalg::{self, Matrix};

/// `y = intercept + coefficients . x`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    #[serde(skip)]
    pub(crate) feature_labels: Vec<String>,
}

impl LinearModel {
    pub fn new(intercept: f64, coefficients: Vec<f64>, feature_labels: Vec<String>) -> Result<Self, ModelError> {
        if coefficients.len() != feature_labels.len() {
            return Err(ModelError::DimensionMismatch {
                expected: feature_labels.len(),
                found: coefficients.len(),
            });
        }
        Ok(LinearModel {
            intercept,
            coefficients,
            feature_labels,
        })
    }
}

impl Regressor for LinearModel {
    fn kind(&self) -> ModelKind {
        ModelKind::Linear
    }

    fn feature_labels(&self) -> &[String] {
        &self.feature_labels
    }

    fn predict_unchecked(&self, x: &[f64]) -> f64 {
        self.intercept + linalg::dot(&self.coefficients, x)
    }
}

/// Least squares with an unpenalized intercept, solved by Householder QR.
///
/// With `ridge_lambda > 0` the system is augmented with `sqrt(lambda) * I`
/// rows under the coefficient columns, which penalizes `|coefficients|^2`
/// but leaves the intercept free. With `ridge_lambda == 0` a design matrix
/// (intercept column included) of rank below `m + 1` is an error.
pub fn fit_linear(x: &Matrix, y: &[f64], labels: &[String], ridge_lambda: f64) -> Result<LinearModel, ModelError> {
    check_training_data(x, y, labels, 1)?;
    if !(ridge_lambda >= 0.0 && ridge_lambda.is_finite()) {
        return Err(ModelError::InvalidParams(format!(
            "ridge_lambda must be >= 0, got {ridge_lambda}"
        )));
    }
    let (n, m) = (x.rows(), x.cols());
    let extra = if ridge_lambda > 0.0 { m } else { 0 };
    let mut a = Matrix::zeros(n + extra, m + 1);
    let mut b = vec![0.0; n + extra];
    for (r, row) in x.iter_rows().enumerate() {
        a.set(r, 0, 1.0);
        for (c, v) in row.iter().enumerate() {
            a.set(r, c + 1, *v);
        }
        b[r] = y[r];
    }
    let s = ridge_lambda.sqrt();
    for j in 0..extra {
        a.set(n + j, j + 1, s);
    }
    let beta = linalg::least_squares(&a, &b).map_err(|d| ModelError::RankDeficient {
        rank: d.rank,
        required: m + 1,
    })?;
    Ok(LinearModel {
        intercept: beta[0],
        coefficients: beta[1..].to_vec(),
        feature_labels: labels.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(m: usize) -> Vec<String> {
        (0..m).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn exact_line() {
        let x = Matrix::from_rows(&[[1.0], [2.0], [3.0]]);
        let m = fit_linear(&x, &[3.0, 5.0, 7.0], &labels(1), 0.0).unwrap();
        assert!((m.intercept - 1.0).abs() < 1e-14);
        assert!((m.coefficients[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn duplicated_columns_are_rank_deficient() {
        let x = Matrix::from_rows(&[[1.0, 1.0], [2.0, 2.0], [3.0, 3.0], [5.0, 5.0]]);
        let err = fit_linear(&x, &[1.0, 2.0, 3.0, 4.0], &labels(2), 0.0).unwrap_err();
        assert_eq!(err, ModelError::RankDeficient { rank: 2, required: 3 });
        // a ridge penalty makes the same problem well posed
        let m = fit_linear(&x, &[1.0, 2.0, 3.0, 4.0], &labels(2), 0.5).unwrap();
        assert!((m.coefficients[0] - m.coefficients[1]).abs() < 1e-12);
    }

    #[test]
    fn constant_column_is_rank_deficient() {
        let x = Matrix::from_rows(&[[4.0], [4.0], [4.0]]);
        assert!(matches!(
            fit_linear(&x, &[1.0, 2.0, 3.0], &labels(1), 0.0),
            Err(ModelError::RankDeficient { .. })
        ));
    }

    #[test]
    fn too_few_rows() {
        let x = Matrix::from_rows(&[[1.0, 2.0], [3.0, 1.0]]);
        assert!(matches!(
            fit_linear(&x, &[1.0, 2.0], &labels(2), 0.0),
            Err(ModelError::RankDeficient { .. })
        ));
    }

    #[test]
    fn ridge_leaves_intercept_unpenalized() {
        // y is constant, so the best penalized fit is zero slope and the mean
        let x = Matrix::from_rows(&[[1.0], [2.0], [3.0], [4.0]]);
        let m = fit_linear(&x, &[6.0; 4], &labels(1), 10.0).unwrap();
        assert!(m.coefficients[0].abs() < 1e-14);
        assert!((m.intercept - 6.0).abs() < 1e-13);
    }

    #[test]
    fn ridge_matches_closed_form_single_feature() {
        // centered: slope = sxy / (sxx + lambda)
        let xs = [1.0, 2.0, 4.0, 7.0];
        let ys = [2.0, 3.0, 7.0, 8.0];
        let lambda = 3.0;
        let (mx, my) = (3.5, 5.0);
        let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = xs.iter().map(|a| (a - mx) * (a - mx)).sum();
        let slope = sxy / (sxx + lambda);
        let x = Matrix::from_rows(&xs.map(|v| [v]));
        let m = fit_linear(&x, &ys, &labels(1), lambda).unwrap();
        assert!((m.coefficients[0] - slope).abs() < 1e-12);
        assert!((m.intercept - (my - slope * mx)).abs() < 1e-12);
    }

    #[test]
    fn predict_arithmetic() {
        let m = LinearModel::new(1.0, vec![2.0], labels(1)).unwrap();
        assert_eq!(m.predict(&[3.0]).unwrap(), 7.0);
        assert_eq!(
            m.predict(&[3.0, 1.0]),
            Err(ModelError::DimensionMismatch { expected: 1, found: 2 })
        );
        assert!(LinearModel::new(0.0, vec![1.0, 2.0], labels(1)).is_err());
    }

    #[test]
    fn nan_input_is_rejected() {
        let x = Matrix::from_rows(&[[1.0], [f64::NAN], [3.0]]);
        assert!(matches!(fit_linear(&x, &[1.0, 2.0, 3.0], &labels(1), 0.0), Err(ModelError::NonFinite(_))));
    }
}
